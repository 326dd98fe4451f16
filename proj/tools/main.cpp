#include <array>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gramevo/experiment.hpp"

namespace {

using namespace gramevo;

std::string trimmed(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Reads a flat "key = value" config file (blank lines and #-comments allowed)
// and returns the entries as --key=value flags.
std::vector<std::string> config_flags(const std::string& path) {
    static const std::array<const char*, 18> kKeys = {
        "algorithm", "problem",    "grammar",       "runs",  "seed",       "pop",
        "gens",      "elitism",    "mut-prob",      "xo-prob", "tournament", "genotype-size",
        "wraps",     "lambda",     "out",           "pagie-grid", "boston-csv", "split-seed"};
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config " + path + ": cannot open");
    std::vector<std::string> flags;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string text = trimmed(line);
        if (text.empty() || text[0] == '#') continue;
        std::size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config " + path + ": line " + std::to_string(lineno) +
                                     ": expected key = value");
        std::string key = trimmed(text.substr(0, eq));
        std::string value = trimmed(text.substr(eq + 1));
        bool known = false;
        for (const char* k : kKeys) known = known || key == k;
        if (!known)
            throw std::runtime_error("config " + path + ": line " + std::to_string(lineno) +
                                     ": unknown key '" + key + "'");
        if (value.empty())
            throw std::runtime_error("config " + path + ": line " + std::to_string(lineno) +
                                     ": empty value for '" + key + "'");
        flags.push_back("--" + key + "=" + value);
    }
    return flags;
}

// Splices config-file entries in as flags directly after the subcommand name,
// so that flags given on the real command line take precedence.
std::vector<std::string> effective_args(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    if (args.size() < 2 || args[1] != "run") return args;
    std::string config_path;
    for (std::size_t i = 2; i < args.size(); ++i) {
        if (args[i] == "--help" || args[i] == "-h") return args;
        if (args[i] == "--config" && i + 1 < args.size())
            config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            config_path = args[i].substr(9);
    }
    if (config_path.empty()) return args;
    std::vector<std::string> expanded = {args[0], args[1]};
    for (std::string& flag : config_flags(config_path)) expanded.push_back(std::move(flag));
    expanded.insert(expanded.end(), args.begin() + 2, args.end());
    return expanded;
}

int cmd_run(const ExperimentSpec& spec) {
    ExperimentResult result = run_experiment(spec);
    std::printf("wrote %s/{fitness.csv%s,summary.csv,best.txt}\n", spec.output_dir.c_str(),
                spec.algorithm == Algorithm::PGE ? ",probs.csv" : "");
    std::printf("best train RRSE over %d run(s): %.2f +/- %.2f\n", result.summary.runs,
                result.summary.mean_train, result.summary.std_train);
    if (result.summary.mean_test)
        std::printf("best test RRSE over %d run(s): %.2f +/- %.2f\n", result.summary.runs,
                    *result.summary.mean_test, *result.summary.std_test);
    return 0;
}

int cmd_summarize(const std::vector<std::string>& paths) {
    SummaryRecord summary = summarize(paths);
    std::printf("runs: %d\n", summary.runs);
    std::printf("mean best fitness: %.2f +/- %.2f\n", summary.mean_train, summary.std_train);
    return 0;
}

int cmd_probs(const std::vector<std::string>& paths, const std::string& nonterminal) {
    std::vector<ProductionProbability> table = dump_final_probs(paths, nonterminal);
    std::printf("mean final probabilities of <%s>:\n", nonterminal.c_str());
    for (const ProductionProbability& row : table)
        std::printf("  %-24s %.4f\n", row.production_text.c_str(), row.mean_probability);
    return 0;
}

int cmd_export_pagie(PagieGrid grid, const std::string& out_path) {
    write_dataset_csv(pagie_dataset(grid), out_path);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grammar-based genetic programming engine (GE and PGE) for "
                 "symbolic regression"};
    app.require_subcommand(1);

    static const std::map<std::string, Algorithm> kAlgorithms{{"ge", Algorithm::GE},
                                                              {"pge", Algorithm::PGE}};
    static const std::map<std::string, ProblemKind> kProblems{{"pagie", ProblemKind::Pagie},
                                                              {"boston", ProblemKind::Boston}};
    static const std::map<std::string, PagieGrid> kGrids{
        {"paper", PagieGrid::Paper}, {"conventional", PagieGrid::Conventional}};

    // --- run ---
    // Config entries are spliced in ahead of real flags by effective_args, so
    // every option takes the last value given: defaults < config file < flags.
    ExperimentSpec spec;
    double lambda = 0.01;
    std::uint64_t split_seed = 0;
    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "Execute seeded evolutionary runs and write CSVs");
    run_cmd->add_option("--config", config_path, "Read options from a key = value file")
        ->take_last();
    run_cmd->add_option("--algorithm", spec.algorithm, "Search algorithm")
        ->transform(CLI::CheckedTransformer(kAlgorithms, CLI::ignore_case))
        ->default_str("pge")
        ->take_last();
    run_cmd->add_option("--problem", spec.problem, "Benchmark problem")
        ->transform(CLI::CheckedTransformer(kProblems, CLI::ignore_case))
        ->default_str("pagie")
        ->take_last();
    run_cmd->add_option("--grammar", spec.grammar_path,
                        "Grammar file (defaults to the problem's grammar)")
        ->take_last();
    run_cmd->add_option("--runs", spec.runs, "Independent runs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str()
        ->take_last();
    run_cmd->add_option("--seed", spec.base_seed, "Base seed; run r uses seed+r")
        ->capture_default_str()
        ->take_last();
    run_cmd->add_option("--pop", spec.engine.population_size, "Population size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str()
        ->take_last();
    run_cmd->add_option("--gens", spec.engine.generations, "Generations after the initial one")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str()
        ->take_last();
    run_cmd->add_option("--elitism", spec.engine.elitism_fraction, "Elite fraction")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str()
        ->take_last();
    run_cmd->add_option("--mut-prob", spec.engine.mutation_prob, "Per-codon mutation probability")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str()
        ->take_last();
    run_cmd->add_option("--xo-prob", spec.engine.crossover_prob, "Crossover probability")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str()
        ->take_last();
    run_cmd->add_option("--tournament", spec.engine.tournament_size, "Tournament size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str()
        ->take_last();
    run_cmd->add_option("--genotype-size", spec.engine.genotype_length, "Codons per genotype")
        ->check(CLI::PositiveNumber)
        ->capture_default_str()
        ->take_last();
    run_cmd->add_option("--wraps", spec.engine.max_wraps, "Maximum genotype wraps while mapping")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str()
        ->take_last();
    run_cmd->add_option("--lambda", lambda, "Learning factor for grammar adaptation")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str()
        ->take_last();
    run_cmd->add_option("--out", spec.output_dir, "Output directory")
        ->capture_default_str()
        ->take_last();
    run_cmd->add_option("--pagie-grid", spec.pagie_grid, "Sampling grid for the surface problem")
        ->transform(CLI::CheckedTransformer(kGrids, CLI::ignore_case))
        ->default_str("paper")
        ->take_last();
    run_cmd->add_option("--boston-csv", spec.boston_csv, "Housing dataset CSV")
        ->capture_default_str()
        ->take_last();
    auto* split_opt = run_cmd->add_option(
        "--split-seed", split_seed,
        "Fixed train/test split seed (default: each run splits with its own seed)");
    split_opt->take_last();

    // --- summarize ---
    std::vector<std::string> fitness_paths;
    auto* sum_cmd =
        app.add_subcommand("summarize", "Mean/stddev of final best fitness across runs");
    sum_cmd->add_option("files", fitness_paths, "fitness.csv files")
        ->required()
        ->check(CLI::ExistingFile);

    // --- probs ---
    std::vector<std::string> probs_paths;
    std::string nonterminal;
    auto* probs_cmd = app.add_subcommand(
        "probs", "Mean final-generation production probabilities of one nonterminal");
    probs_cmd->add_option("files", probs_paths, "probs.csv files")
        ->required()
        ->check(CLI::ExistingFile);
    probs_cmd->add_option("--nonterminal,-n", nonterminal, "Nonterminal name without brackets")
        ->required();

    // --- export-pagie ---
    PagieGrid export_grid = PagieGrid::Paper;
    std::string export_path = "pagie.csv";
    auto* export_cmd =
        app.add_subcommand("export-pagie", "Write the surface-problem dataset as CSV");
    export_cmd->add_option("--grid", export_grid, "Sampling grid")
        ->transform(CLI::CheckedTransformer(kGrids, CLI::ignore_case))
        ->default_str("paper");
    export_cmd->add_option("--out", export_path, "Output CSV path")->capture_default_str();

    std::vector<std::string> args;
    std::vector<const char*> argp;
    try {
        args = effective_args(argc, argv);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    for (const std::string& a : args) argp.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argp.size()), argp.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (run_cmd->parsed()) {
            spec.engine.lambda = LearningFactor(lambda);
            if (*split_opt) spec.split_seed = split_seed;
            if (spec.grammar_path.empty())
                spec.grammar_path = spec.problem == ProblemKind::Pagie ? "grammars/pagie.bnf"
                                                                       : "grammars/boston.bnf";
            return cmd_run(spec);
        }
        if (sum_cmd->parsed()) return cmd_summarize(fitness_paths);
        if (probs_cmd->parsed()) return cmd_probs(probs_paths, nonterminal);
        if (export_cmd->parsed()) return cmd_export_pagie(export_grid, export_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
