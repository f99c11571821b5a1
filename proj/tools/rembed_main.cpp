#include <chrono>
#include <cstdio>
#include <exception>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rembed/core/error.hpp"
#include "rembed/embed/baselines.hpp"
#include "rembed/embed/oracle.hpp"
#include "rembed/embed/regressor.hpp"
#include "rembed/embed/rembrandt.hpp"
#include "rembed/io/embedding_io.hpp"
#include "rembed/io/model_io.hpp"
#include "rembed/io/svmlight.hpp"
#include "rembed/learn/predict.hpp"
#include "rembed/learn/synth.hpp"
#include "rembed/learn/train.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void print_kv(const char* key, const std::string& value) {
    std::printf("%s %s\n", key, value.c_str());
}

void print_kv(const char* key, std::size_t value) {
    std::printf("%s %zu\n", key, value);
}

void print_kv(const char* key, double value) {
    std::printf("%s %.17g\n", key, value);
}

std::string format_vector(const std::vector<double>& v) {
    std::string out;
    char buf[64];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
        if (i > 0) out += ' ';
        out += buf;
    }
    return out;
}

/// Flags shared by every command that reads svmlight data.
void add_format_flags(CLI::App* cmd, rembed::SvmlightOptions& fmt) {
    cmd->add_option("--labels-base", fmt.labels_base, "Index base of labels in the file");
    cmd->add_option("--features-base", fmt.features_base, "Index base of features in the file");
    cmd->add_option("--features", fmt.features,
                    "Declared feature dimension (default: infer as max index + 1)");
    cmd->add_option("--classes", fmt.classes,
                    "Declared class count (default: infer as max label + 1)");
}

struct SolverFlags {
    double ridge = 0.0;
    CLI::Option* ridge_opt = nullptr;

    void attach(CLI::App* cmd, rembed::SolverConfig& solver) {
        ridge_opt = cmd->add_option(
            "--ridge", ridge, "Ridge penalty for the least-squares fits (default: automatic)");
        cmd->add_option("--tol", solver.tol, "Solver convergence tolerance")->capture_default_str();
        cmd->add_option("--max-iters", solver.max_iters, "Solver iteration budget")->capture_default_str();
    }

    void resolve(rembed::SolverConfig& solver) const {
        if (ridge_opt != nullptr && ridge_opt->count() > 0) solver.ridge_lambda = ridge;
    }
};

struct SeedFlags {
    std::uint64_t seed = 0;
    bool deterministic = false;
    CLI::Option* seed_opt = nullptr;

    void attach(CLI::App* cmd) {
        seed_opt = cmd->add_option("--seed", seed, "Seed for all randomness")->capture_default_str();
        cmd->add_flag("--deterministic", deterministic,
                      "Use the --seed default instead of drawing a fresh seed");
    }

    /// Without --seed or --deterministic a fresh seed is drawn and
    /// echoed in the run report, which keeps the run reproducible.
    std::uint64_t resolve() const {
        if (seed_opt->count() > 0 || deterministic) return seed;
        std::random_device rd;
        return (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
    }
};

void print_embed_config(const rembed::EmbedConfig& cfg) {
    print_kv("k", cfg.k);
    print_kv("p", cfg.p);
    print_kv("q", cfg.q);
    print_kv("seed", static_cast<std::size_t>(cfg.seed));
    print_kv("ridge", cfg.solver.ridge_lambda
                          ? format_vector({*cfg.solver.ridge_lambda})
                          : std::string("auto"));
    print_kv("tol", cfg.solver.tol);
    print_kv("max_iters", cfg.solver.max_iters);
    print_kv("normalize_labels", std::string(cfg.normalize_labels ? "1" : "0"));
}

void print_dims(const rembed::Dataset& data) {
    print_kv("n", data.n());
    print_kv("d", data.d());
    print_kv("c", data.c());
}

int cmd_embed(const std::string& data_path, const std::string& out_path,
              const std::string& method, rembed::EmbedConfig cfg,
              const rembed::SvmlightOptions& fmt) {
    const auto start = Clock::now();
    rembed::Dataset data = rembed::load_svmlight(data_path, fmt);
    rembed::Embedding emb;
    if (method == "cs") {
        emb = rembed::cs_embed(data.c(), cfg.k, cfg.seed);
    } else {
        emb = rembed::rembrandt_embed(data, cfg);
    }
    rembed::save_embedding(emb, out_path);
    print_kv("command", std::string("embed"));
    print_kv("method", method);
    print_dims(data);
    print_embed_config(cfg);
    print_kv("out", out_path);
    print_kv("wall_time_s", seconds_since(start));
    print_kv("sigma", format_vector(emb.sigma));
    return 0;
}

int cmd_oracle_check(const std::string& data_path, rembed::EmbedConfig cfg,
                     const rembed::SvmlightOptions& fmt) {
    const auto start = Clock::now();
    rembed::Dataset data = rembed::load_svmlight(data_path, fmt);
    rembed::Embedding fast = rembed::rembrandt_embed(data, cfg);
    rembed::Embedding exact = rembed::exact_oracle(data, cfg.k);
    const double angle = rembed::largest_principal_angle(exact.v, fast.v);
    std::vector<double> deltas(cfg.k);
    double max_delta = 0.0;
    for (std::size_t i = 0; i < cfg.k; ++i) {
        const double denom = std::max(exact.sigma[i], 1e-300);
        deltas[i] = std::abs(fast.sigma[i] - exact.sigma[i]) / denom;
        max_delta = std::max(max_delta, deltas[i]);
    }
    print_kv("command", std::string("oracle-check"));
    print_dims(data);
    print_embed_config(cfg);
    print_kv("principal_angle_rad", angle);
    print_kv("sigma_rel_delta", format_vector(deltas));
    print_kv("max_sigma_rel_delta", max_delta);
    print_kv("wall_time_s", seconds_since(start));
    return 0;
}

int cmd_train(const std::string& data_path, const std::string& emb_path,
              const std::string& out_path, const std::string& kind, std::size_t epochs,
              double lr, std::uint64_t seed, const rembed::SolverConfig& solver,
              rembed::SvmlightOptions fmt) {
    const auto start = Clock::now();
    rembed::Embedding emb = rembed::load_embedding(emb_path);
    // Align the label dimension with the embedding unless overridden.
    if (fmt.classes == 0) fmt.classes = emb.v.rows();
    rembed::Dataset data = rembed::load_svmlight(data_path, fmt);

    rembed::TrainedModel model;
    if (kind == "ilr") {
        rembed::DenseMatrix z = rembed::embedding_regressor(data, emb, solver);
        rembed::DenseMatrix repr = rembed::spmm(data.x, z);
        model = rembed::train_independent_logistic(repr, data.y, epochs, lr, seed);
        model.z = std::move(z);
        model.v = emb.v;
    } else {
        model = rembed::train_inner_product(data, emb, solver);
    }
    model.validate();
    rembed::save_model(model, out_path);
    print_kv("command", std::string("train"));
    print_kv("kind", std::string(rembed::model_kind_name(model.kind)));
    print_dims(data);
    if (kind == "ilr") {
        print_kv("epochs", epochs);
        print_kv("lr", lr);
        print_kv("seed", static_cast<std::size_t>(seed));
    }
    print_kv("out", out_path);
    print_kv("wall_time_s", seconds_since(start));
    return 0;
}

int cmd_predict(const std::string& data_path, const std::string& model_path,
                const std::string& out_path, std::size_t topk, rembed::SvmlightOptions fmt) {
    const auto start = Clock::now();
    rembed::TrainedModel model = rembed::load_model(model_path);
    // Align the feature dimension with the model unless overridden.
    if (fmt.features == 0) fmt.features = model.z.rows();
    rembed::Dataset data = rembed::load_svmlight(data_path, fmt);
    auto preds = rembed::predict_topk(model, data.x, topk);
    rembed::save_predictions(preds, out_path);
    print_kv("command", std::string("predict"));
    print_kv("n", preds.size());
    print_kv("topk", topk);
    print_kv("out", out_path);
    print_kv("wall_time_s", seconds_since(start));
    return 0;
}

int cmd_evaluate(const std::string& data_path, const std::string& preds_path,
                 const rembed::SvmlightOptions& fmt) {
    rembed::Dataset data = rembed::load_svmlight(data_path, fmt);
    auto preds = rembed::load_predictions(preds_path);
    rembed::EvalReport report = rembed::evaluate(preds, data.y);
    char buf[32];
    print_kv("command", std::string("evaluate"));
    print_kv("n_eval", report.n_eval);
    std::snprintf(buf, sizeof(buf), "%.4f", report.test_error);
    print_kv("test_error", std::string(buf));
    std::snprintf(buf, sizeof(buf), "%.4f", report.precision_at_1);
    print_kv("precision_at_1", std::string(buf));
    return 0;
}

int cmd_synth(const rembed::SynthSpec& spec, const std::string& train_path,
              const std::string& test_path, const rembed::SvmlightOptions& fmt) {
    const auto start = Clock::now();
    auto [train, test] = rembed::make_synthetic(spec);
    rembed::save_svmlight(train, train_path, fmt);
    rembed::save_svmlight(test, test_path, fmt);
    print_kv("command", std::string("synth"));
    print_kv("n_train", train.n());
    print_kv("n_test", test.n());
    print_kv("d", train.d());
    print_kv("c", train.c());
    print_kv("true_rank", spec.true_rank);
    print_kv("label_noise", spec.label_noise);
    print_kv("labels_per_example", spec.labels_per_example);
    print_kv("seed", static_cast<std::size_t>(spec.seed));
    print_kv("train_out", train_path);
    print_kv("test_out", test_path);
    print_kv("wall_time_s", seconds_since(start));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rembed: randomized label embeddings for large output spaces"};
    app.require_subcommand(1);

    std::string data_path, out_path, emb_path, model_path, preds_path;
    std::string method = "re";
    std::string kind = "dot";
    rembed::EmbedConfig cfg;
    rembed::SvmlightOptions fmt;
    rembed::SolverConfig solver;
    // One flag-set instance per subcommand: each holds Option pointers
    // into its own subcommand, so `count()` checks see the right parse.
    SolverFlags solver_embed, solver_oracle, solver_train;
    SeedFlags seed_embed, seed_oracle, seed_train, seed_synth;
    std::size_t topk = 1;
    std::size_t epochs = 10;
    double lr = 0.1;
    rembed::SynthSpec spec;
    std::string train_out, test_out;

    auto* embed = app.add_subcommand("embed", "Embed labels from a training file");
    embed->add_option("--data", data_path, "Training data (svmlight)")->required();
    embed->add_option("--out", out_path, "Embedding output path")->required();
    embed->add_option("--method", method, "Embedding method")->capture_default_str()
        ->check(CLI::IsMember({"re", "cs"}));
    embed->add_option("--k", cfg.k, "Embedding dimension")->required();
    embed->add_option("--p", cfg.p, "Oversampling columns")->capture_default_str();
    embed->add_option("--q", cfg.q, "Power iterations")->capture_default_str();
    embed->add_flag("--normalize-labels", cfg.normalize_labels,
                    "Scale label rows to unit L2 norm before embedding");
    solver_embed.attach(embed, cfg.solver);
    seed_embed.attach(embed);
    add_format_flags(embed, fmt);

    auto* oracle = app.add_subcommand("oracle-check",
                                      "Compare the randomized embedding to the exact one");
    oracle->add_option("--data", data_path, "Data file (svmlight, small)")->required();
    oracle->add_option("--k", cfg.k, "Embedding dimension")->required();
    oracle->add_option("--p", cfg.p, "Oversampling columns")->capture_default_str();
    oracle->add_option("--q", cfg.q, "Power iterations")->capture_default_str();
    solver_oracle.attach(oracle, cfg.solver);
    seed_oracle.attach(oracle);
    add_format_flags(oracle, fmt);

    auto* train = app.add_subcommand("train", "Train a decoder on embedded labels");
    train->add_option("--data", data_path, "Training data (svmlight)")->required();
    train->add_option("--embedding", emb_path, "Embedding file from `embed`")->required();
    train->add_option("--out", out_path, "Model output path")->required();
    train->add_option("--kind", kind, "Decoder kind")->capture_default_str()
        ->check(CLI::IsMember({"dot", "ilr"}));
    train->add_option("--epochs", epochs, "SGD epochs (ilr)")->capture_default_str();
    train->add_option("--lr", lr, "SGD learning rate (ilr)")->capture_default_str();
    solver_train.attach(train, solver);
    seed_train.attach(train);
    add_format_flags(train, fmt);

    auto* predict = app.add_subcommand("predict", "Rank labels for a data file");
    predict->add_option("--data", data_path, "Input data (svmlight)")->required();
    predict->add_option("--model", model_path, "Model file from `train`")->required();
    predict->add_option("--out", out_path, "Predictions output path")->required();
    predict->add_option("--topk", topk, "Labels to rank per example")->capture_default_str();
    add_format_flags(predict, fmt);

    auto* evaluate = app.add_subcommand("evaluate", "Score predictions against labeled data");
    evaluate->add_option("--data", data_path, "Labeled data (svmlight)")->required();
    evaluate->add_option("--predictions", preds_path, "Predictions file from `predict`")
        ->required();
    add_format_flags(evaluate, fmt);

    auto* synth = app.add_subcommand("synth", "Write a planted synthetic dataset");
    synth->add_option("--n", spec.n, "Total examples (4:1 train/test split)")->required();
    synth->add_option("--d", spec.d, "Feature dimension")->required();
    synth->add_option("--c", spec.c, "Class count")->required();
    synth->add_option("--rank", spec.true_rank, "Rank of the planted score matrix")->required();
    synth->add_option("--noise", spec.label_noise, "Per-label corruption probability")->capture_default_str();
    synth->add_option("--lpe", spec.labels_per_example, "Labels per example")->capture_default_str();
    synth->add_option("--train-out", train_out, "Training split output path")->required();
    synth->add_option("--test-out", test_out, "Test split output path")->required();
    seed_synth.attach(synth);
    add_format_flags(synth, fmt);

    CLI11_PARSE(app, argc, argv);

    try {
        if (embed->parsed()) {
            solver_embed.resolve(cfg.solver);
            cfg.seed = seed_embed.resolve();
            return cmd_embed(data_path, out_path, method, cfg, fmt);
        }
        if (oracle->parsed()) {
            solver_oracle.resolve(cfg.solver);
            cfg.seed = seed_oracle.resolve();
            return cmd_oracle_check(data_path, cfg, fmt);
        }
        if (train->parsed()) {
            solver_train.resolve(solver);
            return cmd_train(data_path, emb_path, out_path, kind, epochs, lr,
                             seed_train.resolve(), solver, fmt);
        }
        if (predict->parsed()) return cmd_predict(data_path, model_path, out_path, topk, fmt);
        if (evaluate->parsed()) return cmd_evaluate(data_path, preds_path, fmt);
        if (synth->parsed()) {
            spec.seed = seed_synth.resolve();
            return cmd_synth(spec, train_out, test_out, fmt);
        }
    } catch (const rembed::Error& e) {
        std::fprintf(stderr, "rembed: error: %s: %s\n", rembed::errc_name(e.code()), e.what());
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "rembed: error: internal: %s\n", e.what());
        return 64;
    }
    return 0;
}
