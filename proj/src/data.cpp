#include "drmlsad/data.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace drmlsad {

ReturnsDataset gen_synthetic(const SyntheticSpec& spec) {
    if (spec.n_samples < 1 || spec.n_assets < 1)
        throw SolverError("synthetic spec needs at least 1 sample and 1 asset");
    if (spec.phi_scale < 0.0 || spec.zeta_scale_slope < 0.0)
        throw SolverError("synthetic scales must be nonnegative");

    NormalSampler rng(spec.seed);
    Matrix returns(spec.n_samples, spec.n_assets);
    const bool as_stddev = spec.scale_interpretation == ScaleInterpretation::StdDev;
    const double phi_sd = as_stddev ? spec.phi_scale : std::sqrt(spec.phi_scale);

    for (Eigen::Index t = 0; t < spec.n_samples; ++t) {
        const double phi = spec.phi_mean + phi_sd * rng.normal();
        for (Eigen::Index i = 0; i < spec.n_assets; ++i) {
            const double idx = static_cast<double>(i + 1);
            const double scale = idx * spec.zeta_scale_slope;
            const double sd = as_stddev ? scale : std::sqrt(scale);
            returns(t, i) = phi + idx * spec.zeta_mean_slope + sd * rng.normal();
        }
    }

    std::vector<std::string> names(spec.n_assets);
    for (Eigen::Index i = 0; i < spec.n_assets; ++i) names[i] = "asset" + std::to_string(i + 1);
    return ReturnsDataset(std::move(returns), std::move(names), {}, ReturnUnit::Fraction);
}

bool is_missing_sentinel(double v) {
    return std::abs(v - (-99.99)) <= 1e-9 || std::abs(v - (-999.0)) <= 1e-9;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        const auto first = cell.find_first_not_of(" \t\r");
        const auto last = cell.find_last_not_of(" \t\r");
        cells.push_back(first == std::string::npos ? "" : cell.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

}  // namespace

ReturnsDataset load_returns_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw SolverError("cannot open file: " + path);

    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) throw ParseError(1, "empty file: " + path);
    ++line_no;
    if (!line.empty() && line.front() == '\xEF') line = line.substr(3);  // strip BOM

    std::vector<std::string> header = split_csv_line(line);
    bool has_label_column = !header.empty() && (header.front().empty() || header.front() == "date" ||
                                                header.front() == "period" || header.front() == "t");
    const size_t first_asset = has_label_column ? 1 : 0;
    std::vector<std::string> names(header.begin() + first_asset, header.end());
    if (names.empty()) throw ParseError(line_no, "header has no asset columns");

    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            std::ostringstream msg;
            msg << "line " << line_no << ": expected " << header.size() << " cells, got "
                << cells.size();
            throw ParseError(line_no, msg.str());
        }
        if (has_label_column) labels.push_back(cells.front());
        std::vector<double> row(names.size());
        for (size_t j = 0; j < names.size(); ++j) {
            const std::string& cell = cells[first_asset + j];
            try {
                size_t pos = 0;
                row[j] = std::stod(cell, &pos);
                if (pos != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                std::ostringstream msg;
                msg << "line " << line_no << ": cannot parse '" << cell << "' in column "
                    << names[j];
                throw ParseError(line_no, msg.str());
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw ParseError(line_no, "need at least 2 data rows");

    std::vector<bool> drop(names.size(), false);
    for (const auto& row : rows)
        for (size_t j = 0; j < row.size(); ++j)
            if (is_missing_sentinel(row[j])) {
                if (!options.drop_assets_with_missing)
                    throw MissingValuesError(names[j], "asset " + names[j] + " has missing values");
                drop[j] = true;
            }

    std::vector<size_t> keep;
    for (size_t j = 0; j < names.size(); ++j)
        if (!drop[j]) keep.push_back(j);
    if (keep.empty()) throw MissingValuesError("*", "every asset has missing values");

    Matrix returns(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(keep.size()));
    std::vector<std::string> kept_names(keep.size());
    for (size_t j = 0; j < keep.size(); ++j) kept_names[j] = names[keep[j]];
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < keep.size(); ++j)
            returns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][keep[j]];

    return ReturnsDataset(std::move(returns), std::move(kept_names), std::move(labels),
                          options.unit);
}

void save_returns_csv(const ReturnsDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SolverError("cannot write file: " + path);
    out << std::setprecision(17);

    const bool labeled = !data.period_labels().empty();
    if (labeled) out << "period,";
    for (Eigen::Index j = 0; j < data.assets(); ++j) {
        out << data.asset_names()[j];
        out << (j + 1 < data.assets() ? ',' : '\n');
    }
    for (Eigen::Index i = 0; i < data.periods(); ++i) {
        if (labeled) out << data.period_labels()[i] << ',';
        for (Eigen::Index j = 0; j < data.assets(); ++j) {
            out << data.returns()(i, j);
            out << (j + 1 < data.assets() ? ',' : '\n');
        }
    }
}

double bench_target_return(const ReturnsDataset& data) {
    const Vector mu_hat = data.returns().colwise().mean();
    return 0.2 / static_cast<double>(data.periods()) * mu_hat.sum();
}

DrMlsadProblem bench_defaults(const ReturnsDataset& data) {
    return DrMlsadProblem(build_scenario_model(data), 0.15, bench_target_return(data));
}

}  // namespace drmlsad
