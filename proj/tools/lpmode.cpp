#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lpmode/batch.hpp"
#include "lpmode/bench.hpp"
#include "lpmode/errors.hpp"
#include "lpmode/inference.hpp"
#include "lpmode/pipeline.hpp"

namespace {

constexpr const char* version = "0.1.0";

using nlohmann::json;

struct Options {
    std::string input;
    std::string config_file;
    std::string col;
    std::string out_dir;
    std::string family = "normal";
    std::string fit_method = "mle";
    std::string select = "aic";
    std::string estimator = "both";
    int max_order = 8;
    int grid = 1000;
    int quad_nodes = 128;
    int replicates = 500;
    double level = 0.95;
    double tail_delta = 1e-4;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int workers = 1;
    bool transpose = false;
    bool emit_curves = false;
    std::string scenarios_arg = "D1,D2,D3,D4,D5,D6,D7,D8";
    std::string sizes_arg = "250,500,1000";
    std::string methods_arg = "silverman,gmm,lp_l2,lp_maxent";
    std::string csv_out;
    std::size_t sample_n = 1000;
};

lpmode::PipelineConfig build_config(const Options& opt) {
    lpmode::PipelineConfig config;
    if (!opt.config_file.empty()) {
        std::ifstream in(opt.config_file);
        if (!in)
            lpmode::fail("DomainError", "cannot open config file " + opt.config_file);
        json j = json::parse(in);
        config = lpmode::config_from_json(j);
    }
    config.family = lpmode::family_from_name(opt.family);
    config.fit_method = lpmode::fit_method_from_name(opt.fit_method);
    config.selection_rule = lpmode::selection_rule_from_name(opt.select);
    config.estimator = lpmode::estimator_from_name(opt.estimator);
    config.m_max = opt.max_order;
    config.grid = opt.grid;
    config.quad_nodes = opt.quad_nodes;
    config.B = opt.replicates;
    config.ci_level = opt.level;
    config.tail_delta = opt.tail_delta;
    config.seed = opt.seed;
    lpmode::validate(config);
    return config;
}

double parse_number(const std::string& cell, std::size_t line_no) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        lpmode::fail("DomainError", "non-numeric cell '" + cell + "' at line " +
                                        std::to_string(line_no));
    return value;
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
        s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t'))
        ++b;
    return s.substr(b);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep))
        cells.push_back(trim(cell));
    return cells;
}

// Single data column: either a one-column file (optional header) or the
// column named by --col in a matrix with a header row.
std::vector<double> read_column(const std::string& path, const std::string& col) {
    std::ifstream in(path);
    if (!in)
        lpmode::fail("DomainError", "cannot open input file " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::size_t> line_nos;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty())
            continue;
        rows.push_back(split(line, ','));
        line_nos.push_back(line_no);
    }
    if (rows.empty())
        lpmode::fail("EmptyInput", "no data in " + path);

    std::size_t target = 0;
    std::size_t start = 0;
    if (!col.empty()) {
        const auto& header = rows.front();
        auto it = std::find(header.begin(), header.end(), col);
        if (it == header.end())
            lpmode::fail("DomainError", "no column named '" + col + "' in " + path);
        target = static_cast<std::size_t>(it - header.begin());
        start = 1;
    } else {
        char* end = nullptr;
        std::strtod(rows[0][0].c_str(), &end);
        bool numeric = end != rows[0][0].c_str() && *end == '\0';
        if (!numeric)
            start = 1; // single header row tolerated
    }

    std::vector<double> values;
    for (std::size_t r = start; r < rows.size(); ++r) {
        if (target >= rows[r].size())
            lpmode::fail("DomainError", "line " + std::to_string(line_nos[r]) +
                                            " has too few cells");
        values.push_back(parse_number(rows[r][target], line_nos[r]));
    }
    if (values.empty())
        lpmode::fail("EmptyInput", "no data rows in " + path);
    return values;
}

json selection_to_json(const lpmode::SelectionResult& sel) {
    json j;
    j["k"] = sel.k_selected;
    auto indices = sel.selected_indices;
    std::sort(indices.begin(), indices.end());
    j["indices"] = indices;
    j["order_by_magnitude"] = sel.order_by_magnitude;
    j["aic_trace"] = sel.aic_trace;
    return j;
}

json fit_to_json(const lpmode::PipelineFit& fit) {
    json j;
    j["reference"] = lpmode::reference_to_json(fit.reference);
    j["n"] = fit.lp.n;
    j["lp_means"] = fit.lp.values;
    j["selection"] = selection_to_json(fit.selection);
    j["l2"] = fit.l2 ? lpmode::cd_to_json(*fit.l2) : json(nullptr);
    j["maxent"] = fit.maxent ? lpmode::cd_to_json(*fit.maxent) : json(nullptr);
    if (!fit.maxent_error.empty())
        j["maxent_error"] = fit.maxent_error;
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out)
        lpmode::fail("DomainError", "cannot write " + path.string());
    out << text;
}

void emit_result(const Options& opt, const json& result, const std::string& name) {
    std::cout << result.dump(2) << "\n";
    if (!opt.out_dir.empty()) {
        std::filesystem::create_directories(opt.out_dir);
        write_text(std::filesystem::path(opt.out_dir) / name, result.dump(2));
    }
}

void emit_curves(const Options& opt, const lpmode::PipelineFit& fit,
                 const lpmode::PipelineConfig& config) {
    if (!opt.emit_curves)
        return;
    std::string dir = opt.out_dir.empty() ? "." : opt.out_dir;
    std::filesystem::create_directories(dir);

    const int points = 512;
    std::ostringstream dhat;
    dhat << "u";
    if (fit.l2)
        dhat << ",d_l2";
    if (fit.maxent)
        dhat << ",d_maxent";
    dhat << "\n";
    for (int i = 0; i <= points; ++i) {
        double u = static_cast<double>(i) / points;
        dhat << u;
        if (fit.l2)
            dhat << ',' << lpmode::eval_cd(*fit.l2, u);
        if (fit.maxent)
            dhat << ',' << lpmode::eval_cd(*fit.maxent, u);
        dhat << "\n";
    }
    write_text(std::filesystem::path(dir) / "dhat.csv", dhat.str());

    double lo = lpmode::ref_quantile(fit.reference, config.tail_delta);
    double hi = lpmode::ref_quantile(fit.reference, 1.0 - config.tail_delta);
    std::ostringstream fhat;
    fhat << "x,g";
    if (fit.l2)
        fhat << ",f_l2";
    if (fit.maxent)
        fhat << ",f_maxent";
    fhat << "\n";
    for (int i = 0; i <= points; ++i) {
        double x = lo + (hi - lo) * i / points;
        fhat << x << ',' << lpmode::ref_pdf(fit.reference, x);
        if (fit.l2)
            fhat << ',' << lpmode::eval_f({fit.reference, *fit.l2}, x);
        if (fit.maxent)
            fhat << ',' << lpmode::eval_f({fit.reference, *fit.maxent}, x);
        fhat << "\n";
    }
    write_text(std::filesystem::path(dir) / "fhat.csv", fhat.str());
}

std::vector<std::size_t> parse_sizes(const std::string& arg) {
    std::vector<std::size_t> sizes;
    for (const auto& cell : split(arg, ','))
        if (!cell.empty())
            sizes.push_back(static_cast<std::size_t>(std::stoull(cell)));
    return sizes;
}

int cmd_fit(const Options& opt) {
    auto config = build_config(opt);
    auto samples = read_column(opt.input, opt.col);
    auto fit = lpmode::fit_pipeline(samples, config);
    json result = fit_to_json(fit);
    result["config"] = lpmode::config_to_json(config);
    emit_result(opt, result, "fit.json");
    emit_curves(opt, fit, config);
    return 0;
}

int cmd_modes(const Options& opt) {
    auto config = build_config(opt);
    auto samples = read_column(opt.input, opt.col);
    auto fit = lpmode::fit_pipeline(samples, config);
    json result;
    result["reference"] = lpmode::reference_to_json(fit.reference);
    result["selection"] = selection_to_json(fit.selection);
    auto analyze = [&](const lpmode::ComparisonDensity& cd) {
        auto analysis = lpmode::analyze_modes(fit.reference, cd, config);
        json j;
        j["u_modes"] = lpmode::modes_to_json(analysis.u_modes);
        j["x_modes"] = lpmode::modes_to_json(analysis.x_modes);
        j["reconciled"] = lpmode::modes_to_json(analysis.reconciled);
        return j;
    };
    if (fit.l2)
        result["l2"] = analyze(*fit.l2);
    if (fit.maxent)
        result["maxent"] = analyze(*fit.maxent);
    if (!fit.maxent_error.empty())
        result["maxent_error"] = fit.maxent_error;
    result["config"] = lpmode::config_to_json(config);
    emit_result(opt, result, "modes.json");
    emit_curves(opt, fit, config);
    return 0;
}

int cmd_infer(const Options& opt) {
    auto config = build_config(opt);
    auto samples = read_column(opt.input, opt.col);
    json result;
    auto run = [&](lpmode::Estimator est, const char* key) {
        lpmode::PipelineConfig narrowed = config;
        narrowed.estimator = est;
        auto report = lpmode::bootstrap_modes(samples, narrowed, config.B,
                                              config.ci_level, config.seed,
                                              opt.workers);
        result[key] = lpmode::inference_to_json(report);
    };
    if (config.estimator == lpmode::Estimator::Both) {
        run(lpmode::Estimator::L2, "l2");
        run(lpmode::Estimator::MaxEnt, "maxent");
    } else if (config.estimator == lpmode::Estimator::L2) {
        run(lpmode::Estimator::L2, "l2");
    } else {
        run(lpmode::Estimator::MaxEnt, "maxent");
    }
    result["config"] = lpmode::config_to_json(config);
    emit_result(opt, result, "infer.json");
    return 0;
}

int cmd_batch(const Options& opt) {
    auto config = build_config(opt);
    std::ifstream in(opt.input);
    if (!in)
        lpmode::fail("DomainError", "cannot open input file " + opt.input);
    auto matrix = lpmode::read_csv_matrix(in, opt.transpose);
    auto report = lpmode::run_batch(matrix, config, opt.workers);
    emit_result(opt, lpmode::batch_to_json(report), "batch.json");
    if (!opt.csv_out.empty())
        write_text(opt.csv_out, lpmode::batch_csv_summary(report));
    return 0;
}

int cmd_bench(const Options& opt) {
    std::vector<std::string> ids;
    for (const auto& cell : split(opt.scenarios_arg, ','))
        if (!cell.empty())
            ids.push_back(cell);
    std::vector<lpmode::BenchMethod> methods;
    for (const auto& cell : split(opt.methods_arg, ','))
        if (!cell.empty())
            methods.push_back(lpmode::bench_method_from_name(cell));
    auto table = lpmode::run_mode_benchmark(ids, parse_sizes(opt.sizes_arg),
                                    opt.replicates, opt.seed, methods,
                                    opt.workers);
    emit_result(opt, lpmode::bench_to_json(table), "bench.json");
    if (!opt.csv_out.empty())
        write_text(opt.csv_out, lpmode::bench_csv(table));
    return 0;
}

int cmd_sample(const Options& opt) {
    std::ifstream in(opt.input);
    if (!in)
        lpmode::fail("DomainError", "cannot open model file " + opt.input);
    json j = json::parse(in);
    lpmode::SkewGDensity sk;
    sk.reference = lpmode::reference_from_json(j.at("reference"));
    if (j.contains("cd") && !j.at("cd").is_null()) {
        sk.cd = lpmode::cd_from_json(j.at("cd"));
    } else {
        auto want = lpmode::estimator_from_name(opt.estimator);
        const char* key =
            want == lpmode::Estimator::L2 ? "l2"
            : (j.contains("maxent") && !j.at("maxent").is_null()) ? "maxent"
                                                                  : "l2";
        if (!j.contains(key) || j.at(key).is_null())
            lpmode::fail("DomainError",
                         std::string("model file has no '") + key + "' fit");
        sk.cd = lpmode::cd_from_json(j.at(key));
    }

    auto stats = lpmode::sample_skewg_stats(sk, opt.sample_n, opt.seed);
    std::ostringstream csv;
    csv << "x\n";
    for (double x : stats.draws)
        csv << x << "\n";
    if (!opt.out_dir.empty()) {
        std::filesystem::create_directories(opt.out_dir);
        write_text(std::filesystem::path(opt.out_dir) / "samples.csv", csv.str());
    } else {
        std::cout << csv.str();
    }
    json meta;
    meta["n"] = stats.draws.size();
    meta["acceptance_rate"] = stats.acceptance_rate;
    meta["envelope"] = stats.envelope;
    meta["seed"] = opt.seed;
    std::cerr << meta.dump() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LP-basis mode identification pipeline"};
    app.set_version_flag("--version", std::string("lpmode ") + version);
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* sub, bool with_input) {
        if (with_input)
            sub->add_option("input", opt.input, "input CSV file")->required();
        sub->add_option("--config", opt.config_file, "JSON config file");
        sub->add_option("--family", opt.family, "reference family: normal|exponential");
        sub->add_option("--fit-method", opt.fit_method, "mle|moments");
        sub->add_option("--max-order", opt.max_order, "highest LP order scanned");
        sub->add_option("--select", opt.select, "selection rule: aic|bic");
        sub->add_option("--estimator", opt.estimator, "l2|maxent|both");
        sub->add_option("--grid", opt.grid, "mode search grid size");
        sub->add_option("--quad-nodes", opt.quad_nodes, "quadrature nodes");
        sub->add_option("--replicates", opt.replicates, "bootstrap / benchmark replicates");
        sub->add_option("--level", opt.level, "confidence level");
        sub->add_option("--tail-delta", opt.tail_delta, "quantile tail truncation");
        sub->add_option("--seed", opt.seed, "random seed")
            ->each([&](const std::string&) { opt.seed_given = true; });
        sub->add_option("--workers", opt.workers, "worker thread cap");
        sub->add_option("--out-dir", opt.out_dir, "directory for result artifacts");
        sub->add_flag("--emit-curves", opt.emit_curves, "write dhat.csv / fhat.csv");
    };

    auto* fit = app.add_subcommand("fit", "fit reference and comparison density");
    add_common(fit, true);
    fit->add_option("--col", opt.col, "column name to analyze");

    auto* modes = app.add_subcommand("modes", "full mode identification report");
    add_common(modes, true);
    modes->add_option("--col", opt.col, "column name to analyze");

    auto* infer = app.add_subcommand("infer", "mode locations with bootstrap uncertainty");
    add_common(infer, true);
    infer->add_option("--col", opt.col, "column name to analyze");

    auto* batch = app.add_subcommand("batch", "per-variable mode exploration over a matrix");
    add_common(batch, true);
    batch->add_flag("--transpose", opt.transpose, "variables are rows, not columns");
    batch->add_option("--csv", opt.csv_out, "also write a CSV summary here");

    auto* bench = app.add_subcommand("bench", "Monte-Carlo benchmark table");
    add_common(bench, false);
    bench->add_option("--scenarios", opt.scenarios_arg, "comma-separated scenario ids");
    bench->add_option("--sizes", opt.sizes_arg, "comma-separated sample sizes");
    bench->add_option("--methods", opt.methods_arg,
                      "comma-separated: silverman,gmm,lp_l2,lp_maxent");
    bench->add_option("--csv", opt.csv_out, "also write the table as CSV here");

    auto* sample = app.add_subcommand("sample", "draw from a fitted model JSON");
    add_common(sample, true);
    sample->add_option("--n", opt.sample_n, "number of draws");

    CLI11_PARSE(app, argc, argv);

    if (!opt.seed_given) {
        std::random_device rd;
        opt.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        std::cerr << json{{"seed", opt.seed}}.dump() << "\n";
    }

    try {
        if (fit->parsed())
            return cmd_fit(opt);
        if (modes->parsed())
            return cmd_modes(opt);
        if (infer->parsed())
            return cmd_infer(opt);
        if (batch->parsed())
            return cmd_batch(opt);
        if (bench->parsed())
            return cmd_bench(opt);
        if (sample->parsed())
            return cmd_sample(opt);
    } catch (const lpmode::Error& err) {
        json e{{"error", {{"code", err.code()}, {"message", err.what()}}}};
        std::cerr << e.dump() << "\n";
        return 1;
    } catch (const std::exception& err) {
        json e{{"error", {{"code", "Internal"}, {"message", err.what()}}}};
        std::cerr << e.dump() << "\n";
        return 1;
    }
    return 0;
}
