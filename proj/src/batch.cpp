#include "lpmode/batch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lpmode/errors.hpp"
#include "lpmode/parallel.hpp"
#include "lpmode/pipeline.hpp"
#include "lpmode/rng.hpp"

namespace lpmode {

double gini(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 3)
        fail("DegenerateSample", "gini: need at least 3 samples");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return samples[a] < samples[b]; });
    if (samples[order.front()] == samples[order.back()])
        fail("DegenerateSample", "gini: constant sample");

    // Mid-rank empirical CDF values.
    std::vector<double> cdf(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && samples[order[j + 1]] == samples[order[i]])
            ++j;
        double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t t = i; t <= j; ++t)
            cdf[order[t]] = midrank / n;
        i = j + 1;
    }

    double mx = 0.0, mf = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        mx += samples[t];
        mf += cdf[t];
    }
    mx /= n;
    mf /= n;
    double sxf = 0.0, sxx = 0.0, sff = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        double dx = samples[t] - mx, df = cdf[t] - mf;
        sxf += dx * df;
        sxx += dx * dx;
        sff += df * df;
    }
    if (!(sxx > 0.0) || !(sff > 0.0))
        fail("DegenerateSample", "gini: zero variance");
    return sxf / std::sqrt(sxx * sff);
}

BatchReport run_batch(const NamedColumns& matrix, const PipelineConfig& config,
                      int workers) {
    validate(config);
    BatchReport report;
    report.config_echo = config;
    report.results.resize(matrix.size());

    parallel_for(matrix.size(), workers, [&](std::size_t i) {
        const auto& [name, values] = matrix[i];
        VariableResult& res = report.results[i];
        res.name = name;
        res.n = values.size();
        if (values.size() < 30) {
            res.error = "SkippedSmallSample";
            return;
        }
        PipelineConfig local = config;
        local.seed = derive_seed(config.seed, name);
        try {
            PipelineFit fit = fit_pipeline(values, local);
            const ComparisonDensity& cd = fit.maxent ? *fit.maxent : *fit.l2;
            res.estimator_used = cd_kind_name(cd.kind);
            res.selection = cd.indices;
            ModeAnalysis analysis = analyze_modes(fit.reference, cd, local);
            res.modes = analysis.reconciled.locations;
            res.mode_count = static_cast<int>(res.modes.size());
            res.gini = gini(values);
        } catch (const Error& err) {
            res.error = err.code() == "NonConvergence" ? "NonConvergence" : "FitFailure";
            res.estimator_used.clear();
            res.modes.clear();
            res.mode_count = 0;
        }
    });

    for (const auto& res : report.results)
        if (res.error.empty())
            ++report.modality_histogram[res.mode_count];
    return report;
}

namespace {

double parse_cell(const std::string& cell, const std::string& context) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    while (end && *end == ' ')
        ++end;
    if (end == begin || (end && *end != '\0'))
        fail("DomainError", "non-numeric cell '" + cell + "' " + context);
    return value;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ','))
        cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

std::string trimmed(std::string s) {
    auto is_space = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && is_space(s.back()))
        s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && is_space(s[b]))
        ++b;
    return s.substr(b);
}

} // namespace

NamedColumns read_csv_matrix(std::istream& in, bool transpose) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trimmed(line).empty())
            continue;
        auto cells = split_line(line);
        for (auto& c : cells)
            c = trimmed(c);
        rows.push_back(std::move(cells));
    }
    if (rows.empty())
        fail("EmptyInput", "empty CSV matrix");

    NamedColumns out;
    if (!transpose) {
        const auto& header = rows.front();
        out.resize(header.size());
        for (std::size_t c = 0; c < header.size(); ++c)
            out[c].first = header[c];
        for (std::size_t r = 1; r < rows.size(); ++r) {
            if (rows[r].size() != header.size())
                fail("DomainError",
                     "CSV row " + std::to_string(r + 1) + " has " +
                         std::to_string(rows[r].size()) + " cells, expected " +
                         std::to_string(header.size()));
            for (std::size_t c = 0; c < header.size(); ++c)
                out[c].second.push_back(parse_cell(
                    rows[r][c], "at row " + std::to_string(r + 1)));
        }
        return out;
    }

    // Row-oriented: first cell names the variable. A leading row whose data
    // cells do not all parse as numbers is taken as a header and skipped.
    std::size_t start = 0;
    if (!rows.empty() && rows[0].size() > 1) {
        bool numeric = true;
        for (std::size_t c = 1; c < rows[0].size() && numeric; ++c) {
            char* end = nullptr;
            std::strtod(rows[0][c].c_str(), &end);
            numeric = end != rows[0][c].c_str() && *end == '\0';
        }
        if (!numeric)
            start = 1;
    }
    for (std::size_t r = start; r < rows.size(); ++r) {
        if (rows[r].size() < 2)
            fail("DomainError", "CSV row " + std::to_string(r + 1) +
                                    " has no data cells");
        std::vector<double> values;
        values.reserve(rows[r].size() - 1);
        for (std::size_t c = 1; c < rows[r].size(); ++c)
            values.push_back(
                parse_cell(rows[r][c], "at row " + std::to_string(r + 1)));
        out.emplace_back(rows[r][0], std::move(values));
    }
    if (out.empty())
        fail("EmptyInput", "CSV matrix has no variables");
    return out;
}

nlohmann::json batch_to_json(const BatchReport& report) {
    nlohmann::json j;
    auto results = nlohmann::json::array();
    for (const auto& r : report.results) {
        nlohmann::json v;
        v["name"] = r.name;
        v["n"] = r.n;
        v["mode_count"] = r.mode_count;
        v["modes"] = r.modes;
        v["estimator"] = r.estimator_used;
        v["selection"] = r.selection;
        v["error"] = r.error;
        if (r.error.empty())
            v["gini"] = r.gini;
        results.push_back(std::move(v));
    }
    j["results"] = std::move(results);
    nlohmann::json hist;
    for (const auto& [count, vars] : report.modality_histogram)
        hist[std::to_string(count)] = vars;
    j["modality_histogram"] = std::move(hist);
    j["config"] = config_to_json(report.config_echo);
    return j;
}

std::string batch_csv_summary(const BatchReport& report) {
    std::ostringstream out;
    out << "name,n,mode_count,modes,estimator,error\n";
    for (const auto& r : report.results) {
        out << r.name << ',' << r.n << ',' << r.mode_count << ',';
        for (std::size_t i = 0; i < r.modes.size(); ++i) {
            if (i)
                out << '|';
            out << r.modes[i];
        }
        out << ',' << r.estimator_used << ',' << r.error << '\n';
    }
    return out.str();
}

} // namespace lpmode
