#include "gramevo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "num_format.hpp"

namespace gramevo {

namespace {

using detail::fmt_double;

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write output file: " + path.string());
    return out;
}

// Reads a CSV file, checks the header has at least the named columns in any
// position, and hands each data row to the sink as a field vector.
template <typename Sink>
void for_each_csv_row(const std::string& path, const std::vector<std::string>& required,
                      std::vector<int>& column_of, Sink&& sink) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header = split_csv_line(line);
    column_of.assign(required.size(), -1);
    for (std::size_t c = 0; c < header.size(); ++c)
        for (std::size_t r = 0; r < required.size(); ++r)
            if (header[c] == required[r]) column_of[r] = static_cast<int>(c);
    for (std::size_t r = 0; r < required.size(); ++r)
        if (column_of[r] < 0)
            throw std::runtime_error(path + ": missing column '" + required[r] + "'");

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() < header.size())
            throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                     ": too few fields");
        sink(fields);
    }
}

RunResult execute_run(const ExperimentSpec& spec, const Grammar& grammar,
                      const Dataset* shared_data, int run_index) {
    RunResult result;
    result.run = run_index;
    result.seed = spec.base_seed + static_cast<std::uint64_t>(run_index);

    Dataset local;
    const Dataset* data = shared_data;
    if (data == nullptr) {
        local = load_boston(spec.boston_csv, spec.split_seed.value_or(result.seed));
        data = &local;
    }

    EngineConfig config = spec.engine;
    config.algorithm = spec.algorithm;
    config.seed = result.seed;

    FitnessFn evaluate_phenotype = [data](const std::string& phenotype) {
        return fitness(compile(phenotype, data->feature_names), *data, Partition::Train);
    };
    result.trace = run(config, grammar, evaluate_phenotype);

    result.train_fitness = result.trace.best_ever.fitness;
    result.phenotype = result.trace.best_ever.phenotype;
    if (spec.problem == ProblemKind::Boston) {
        result.test_fitness =
            result.trace.best_ever.valid
                ? fitness(compile(result.phenotype, data->feature_names), *data, Partition::Test)
                : kWorstFitness;
    }
    return result;
}

void write_fitness_csv(const std::filesystem::path& path, const std::vector<RunResult>& runs) {
    std::ofstream out = open_output(path);
    out << "run,generation,best_fitness,best_ever_fitness,mean_fitness,invalid_count\n";
    for (const RunResult& r : runs)
        for (const GenerationStats& s : r.trace.per_generation)
            out << r.run << ',' << s.generation << ',' << fmt_double(s.best_fitness) << ','
                << fmt_double(s.best_ever_fitness) << ',' << fmt_double(s.mean_fitness) << ','
                << s.invalid_count << '\n';
}

void write_probs_csv(const std::filesystem::path& path, const Grammar& grammar,
                     const std::vector<RunResult>& runs) {
    std::ofstream out = open_output(path);
    out << "run,generation,nonterminal,production_index,production_text,probability\n";
    for (const RunResult& r : runs) {
        for (std::size_t gen = 0; gen < r.trace.prob_snapshots.size(); ++gen) {
            const auto& snapshot = r.trace.prob_snapshots[gen];
            for (std::size_t nt = 0; nt < grammar.nonterminals.size(); ++nt)
                for (std::size_t i = 0; i < snapshot[nt].size(); ++i)
                    out << r.run << ',' << gen << ',' << csv_escape(grammar.nonterminals[nt])
                        << ',' << i << ','
                        << csv_escape(production_text(grammar.productions[nt][i])) << ','
                        << fmt_double(snapshot[nt][i]) << '\n';
        }
    }
}

void write_summary_csv(const std::filesystem::path& path, const SummaryRecord& summary) {
    std::ofstream out = open_output(path);
    out << "runs,mean_best_train,std_best_train,mean_best_test,std_best_test\n";
    out << summary.runs << ',' << fmt_double(summary.mean_train) << ','
        << fmt_double(summary.std_train) << ',';
    if (summary.mean_test) out << fmt_double(*summary.mean_test);
    out << ',';
    if (summary.std_test) out << fmt_double(*summary.std_test);
    out << '\n';
}

void write_best_txt(const std::filesystem::path& path, const std::vector<RunResult>& runs) {
    std::ofstream out = open_output(path);
    for (const RunResult& r : runs) {
        out << "run " << r.run << '\n';
        out << "  seed: " << r.seed << '\n';
        out << "  train RRSE: " << fmt_double(r.train_fitness) << '\n';
        if (r.test_fitness) out << "  test RRSE: " << fmt_double(*r.test_fitness) << '\n';
        out << "  phenotype: " << (r.phenotype.empty() ? "<invalid>" : r.phenotype) << '\n';
    }
}

std::pair<double, double> mean_and_population_std(const std::vector<double>& values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    return {mean, std::sqrt(var)};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.runs < 1) throw std::invalid_argument("an experiment needs at least one run");
    spec.engine.check();

    Grammar grammar = parse_bnf_file(spec.grammar_path);

    // Problems whose data do not depend on the run share one dataset.
    Dataset shared;
    const Dataset* shared_ptr = nullptr;
    if (spec.problem == ProblemKind::Pagie) {
        shared = pagie_dataset(spec.pagie_grid);
        shared_ptr = &shared;
    } else if (spec.split_seed) {
        shared = load_boston(spec.boston_csv, *spec.split_seed);
        shared_ptr = &shared;
    }

    ExperimentResult result;
    result.runs.resize(static_cast<std::size_t>(spec.runs));
    int workers = std::clamp(spec.threads, 1, spec.runs);
    if (workers == 1) {
        for (int r = 0; r < spec.runs; ++r)
            result.runs[static_cast<std::size_t>(r)] = execute_run(spec, grammar, shared_ptr, r);
    } else {
        std::atomic<int> next_run{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (;;) {
                int r = next_run.fetch_add(1);
                if (r >= spec.runs) return;
                try {
                    result.runs[static_cast<std::size_t>(r)] =
                        execute_run(spec, grammar, shared_ptr, r);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    std::vector<double> train, test;
    for (const RunResult& r : result.runs) {
        train.push_back(r.train_fitness);
        if (r.test_fitness) test.push_back(*r.test_fitness);
    }
    result.summary.runs = spec.runs;
    std::tie(result.summary.mean_train, result.summary.std_train) =
        mean_and_population_std(train);
    if (!test.empty()) {
        auto [m, s] = mean_and_population_std(test);
        result.summary.mean_test = m;
        result.summary.std_test = s;
    }

    std::filesystem::path dir(spec.output_dir);
    std::filesystem::create_directories(dir);
    write_fitness_csv(dir / "fitness.csv", result.runs);
    if (spec.algorithm == Algorithm::PGE) write_probs_csv(dir / "probs.csv", grammar, result.runs);
    write_summary_csv(dir / "summary.csv", result.summary);
    write_best_txt(dir / "best.txt", result.runs);
    return result;
}

SummaryRecord summarize(const std::vector<std::string>& fitness_csv_paths) {
    if (fitness_csv_paths.empty()) throw std::invalid_argument("no fitness CSV files given");

    std::vector<double> finals;
    for (std::size_t f = 0; f < fitness_csv_paths.size(); ++f) {
        // (run id) -> (generation, best_ever) with the largest generation kept
        std::map<long long, std::pair<long long, double>> last;
        std::vector<int> col;
        for_each_csv_row(fitness_csv_paths[f], {"run", "generation", "best_ever_fitness"}, col,
                         [&](const std::vector<std::string>& fields) {
                             long long run = std::stoll(fields[static_cast<std::size_t>(col[0])]);
                             long long gen = std::stoll(fields[static_cast<std::size_t>(col[1])]);
                             double best =
                                 std::stod(fields[static_cast<std::size_t>(col[2])]);
                             auto [it, fresh] = last.try_emplace(run, gen, best);
                             if (!fresh && gen > it->second.first) it->second = {gen, best};
                         });
        if (last.empty())
            throw std::runtime_error(fitness_csv_paths[f] + ": no data rows");
        for (const auto& [run, entry] : last) finals.push_back(entry.second);
    }

    SummaryRecord summary;
    summary.runs = static_cast<int>(finals.size());
    std::tie(summary.mean_train, summary.std_train) = mean_and_population_std(finals);
    return summary;
}

std::vector<ProductionProbability> dump_final_probs(
    const std::vector<std::string>& probs_csv_paths, const std::string& nonterminal) {
    if (probs_csv_paths.empty()) throw std::invalid_argument("no probability CSV files given");

    struct Row {
        long long generation;
        int production_index;
        std::string text;
        double probability;
    };

    // mean over every run's final-generation snapshot of the nonterminal
    std::map<int, std::pair<std::string, double>> sums;  // index -> (text, sum)
    int snapshots = 0;
    for (const std::string& path : probs_csv_paths) {
        std::map<long long, std::vector<Row>> rows_by_run;
        std::vector<int> col;
        for_each_csv_row(
            path,
            {"run", "generation", "nonterminal", "production_index", "production_text",
             "probability"},
            col, [&](const std::vector<std::string>& fields) {
                if (fields[static_cast<std::size_t>(col[2])] != nonterminal) return;
                Row row;
                long long run = std::stoll(fields[static_cast<std::size_t>(col[0])]);
                row.generation = std::stoll(fields[static_cast<std::size_t>(col[1])]);
                row.production_index =
                    std::stoi(fields[static_cast<std::size_t>(col[3])]);
                row.text = fields[static_cast<std::size_t>(col[4])];
                row.probability = std::stod(fields[static_cast<std::size_t>(col[5])]);
                rows_by_run[run].push_back(std::move(row));
            });
        for (auto& [run, rows] : rows_by_run) {
            long long final_gen = 0;
            for (const Row& r : rows) final_gen = std::max(final_gen, r.generation);
            for (const Row& r : rows) {
                if (r.generation != final_gen) continue;
                auto [it, fresh] = sums.try_emplace(r.production_index, r.text, 0.0);
                it->second.second += r.probability;
            }
            ++snapshots;
        }
    }
    if (snapshots == 0)
        throw std::runtime_error("no probability rows found for nonterminal '" + nonterminal +
                                 "'");

    std::vector<ProductionProbability> table;
    for (const auto& [index, entry] : sums)
        table.push_back({index, entry.first, entry.second / snapshots});
    std::stable_sort(table.begin(), table.end(),
                     [](const ProductionProbability& a, const ProductionProbability& b) {
                         return a.mean_probability > b.mean_probability;
                     });
    return table;
}

}  // namespace gramevo
