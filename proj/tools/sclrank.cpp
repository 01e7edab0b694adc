#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sclrank/pipeline.hpp"

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::optional<std::string> output;
    std::optional<std::size_t> epochs;
    std::optional<double> tau;
    std::optional<double> lambda;
    std::optional<std::string> loss;
    std::optional<std::string> selector;
    std::optional<bool> augment;
};

} // namespace

int main(int argc, char** argv)
{
    using namespace sclrank;
    CLI::App app{"Contrastive re-ranking toolkit: augmentation, training, re-ranking, evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;
    int verbosity = 1;
    app.add_option("--config", config_path, "pipeline configuration (JSON)");
    app.add_option("--seed", ov.seed, "random seed (also seeds the encoder initialization)");
    app.add_option("--jobs", ov.jobs, "worker threads for grid cells and multi-seed runs");
    app.add_option("--output", ov.output, "output directory");
    app.add_option("-v,--verbosity", verbosity, "0 quiet, 1 warnings, 2 progress")
        ->check(CLI::Range(0, 2));

    auto* validate = app.add_subcommand("validate", "check referential integrity and print counts");

    auto* augment = app.add_subcommand("augment", "write the augmented training triples");
    std::optional<std::string> summaries;
    augment->add_option("--summaries", summaries, "also write extracted summaries as JSONL");

    auto* trainc = app.add_subcommand("train", "train a re-ranker");
    std::size_t seeds = 1;
    trainc->add_option("--seeds", seeds, "independent runs with consecutive seeds")
        ->check(CLI::PositiveNumber);

    auto* grid = app.add_subcommand("grid", "grid search over tau and lambda");
    std::vector<double> taus, lambdas;
    grid->add_option("--taus", taus, "temperatures")->delimiter(',');
    grid->add_option("--lambdas", lambdas, "interpolation weights")->delimiter(',');

    for (auto* sub : {augment, trainc, grid}) {
        sub->add_option("--epochs", ov.epochs, "training epochs");
        sub->add_option("--tau", ov.tau, "contrastive temperature");
        sub->add_option("--lambda", ov.lambda, "contrastive weight");
        sub->add_option("--loss", ov.loss, "pointwise | pairwise");
        sub->add_option("--selector", ov.selector, "term_matching | embedding | sampling");
        sub->add_option("--augment", ov.augment, "augment training batches (true/false)");
    }

    auto* rerankc = app.add_subcommand("rerank", "re-rank the first-stage run with a model");
    std::string model, run_out, tag = "sclrank";
    rerankc->add_option("--model", model, "checkpoint")->required();
    rerankc->add_option("--out", run_out, "output run file (default OUTPUT/rerank.run)");
    rerankc->add_option("--tag", tag, "system tag");

    auto* evalc = app.add_subcommand("eval", "AP, RR and nDCG@10 of a run");
    std::string eval_run, eval_tag = "system", prefix;
    bool linear_gain = false;
    evalc->add_option("--run", eval_run, "run file (default: configured first-stage run)");
    evalc->add_option("--tag", eval_tag, "system name");
    evalc->add_option("--prefix", prefix, "output prefix (default OUTPUT/TAG)");
    evalc->add_flag("--linear-gain", linear_gain, "nDCG with linear instead of exponential gain");

    auto* compare = app.add_subcommand("compare", "paired t-test between per-query CSVs");
    std::string csv_a, csv_b, metric = "ndcg10";
    compare->add_option("a", csv_a, "system A per-query CSV")->required();
    compare->add_option("b", csv_b, "system B per-query CSV")->required();
    compare->add_option("--metric", metric, "map | rr | ndcg10");

    auto* synthc = app.add_subcommand("synth", "generate the synthetic dataset");
    synth::SynthConfig sc;
    synthc->add_option("--queries", sc.train_queries, "training queries (validation included)");
    synthc->add_option("--validation-queries", sc.validation_queries);
    synthc->add_option("--test-queries", sc.test_queries);
    synthc->add_option("--corpus-size", sc.corpus_size);
    synthc->add_option("--top-k", sc.top_k);

    CLI11_PARSE(app, argc, argv);
    log::set_level(static_cast<log::Level>(verbosity));

    try {
        if (synthc->parsed()) {
            if (ov.seed) sc.seed = *ov.seed;
            return cmd_synth(sc, ov.output.value_or("synth"));
        }
        if (compare->parsed()) {
            return cmd_compare(csv_a, csv_b, parse_metric(metric), std::cout);
        }

        PipelineConfig cfg;
        if (!config_path.empty()) cfg = load_pipeline_config(config_path);
        if (ov.seed) {
            cfg.train.seed = *ov.seed;
            cfg.train.encoder.init_seed = *ov.seed;
            cfg.train.selector.seed = *ov.seed;
        }
        if (ov.jobs) cfg.jobs = *ov.jobs;
        if (ov.output) cfg.output = *ov.output;
        if (ov.epochs) cfg.train.epochs = *ov.epochs;
        if (ov.tau) cfg.train.loss.tau = *ov.tau;
        if (ov.lambda) cfg.train.loss.lambda = *ov.lambda;
        if (ov.loss) cfg.train.loss.base = parse_ranking_loss(*ov.loss);
        if (ov.selector) cfg.train.selector.strategy = parse_selector_strategy(*ov.selector);
        if (ov.augment) cfg.train.augment = *ov.augment;

        if (validate->parsed()) return cmd_validate(cfg, std::cout);
        if (augment->parsed()) {
            std::optional<fs::path> s;
            if (summaries) s = *summaries;
            return cmd_augment(cfg, s);
        }
        if (trainc->parsed()) return cmd_train(cfg, seeds);
        if (grid->parsed()) return cmd_grid(cfg, taus, lambdas);
        if (rerankc->parsed()) {
            fs::path out = run_out.empty() ? cfg.output / "rerank.run" : fs::path(run_out);
            return cmd_rerank(cfg, model, out, tag);
        }
        if (evalc->parsed()) {
            fs::path run = eval_run.empty() ? detail::require_path(cfg.run, "run") : fs::path(eval_run);
            fs::path pre = prefix.empty() ? cfg.output / eval_tag : fs::path(prefix);
            return cmd_eval(cfg, run, eval_tag, pre, std::cout,
                            linear_gain ? Gain::linear : Gain::exponential);
        }
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
