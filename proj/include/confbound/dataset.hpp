#pragma once

// Datasets of observations with Gaussian uncertainties and the CSV reader
// for the on-disk format: header row naming columns x[,x2,...],y,sigma.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "confbound/errors.hpp"
#include "confbound/stats.hpp"

namespace confbound {

struct DataSet {
    std::vector<std::vector<double>> xs;  // independent variable per point
    std::vector<double> ys;               // one observation per point
    Covariance cov;                       // diagonal or dense, size == ys.size()

    int size() const { return static_cast<int>(ys.size()); }

    // Flattened first component of x, the common case for 1-d conditions.
    std::vector<double> x1() const {
        std::vector<double> v(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) v[i] = xs[i].at(0);
        return v;
    }

    void validate() const {
        if (xs.size() != ys.size()) throw InputError("dataset: |xs| != |ys|");
        if (cov.size() != size()) throw InputError("dataset: sigma shape mismatch");
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (xs[i].size() != xs[0].size())
                throw InputError("dataset: inconsistent x dimension");
    }
};

// Three-point linear-trend dataset used throughout the toy examples.
inline DataSet toy_dataset() {
    DataSet d;
    d.xs = {{1.0}, {2.0}, {3.0}};
    d.ys = {4.0, 5.0, 6.5};
    d.cov = Covariance::diagonal({0.5, 0.45, 0.6});
    return d;
}

// Influenza outbreak at an English boarding school, 1978: infected counts on
// days 1..14 out of 763 pupils, uncertainties taken as sigma = 15.
inline DataSet boarding_school_dataset() {
    DataSet d;
    const double counts[14] = {3, 8, 28, 75, 221, 291, 255, 235, 190, 126, 70, 28, 12, 5};
    for (int t = 1; t <= 14; ++t) {
        d.xs.push_back({static_cast<double>(t)});
        d.ys.push_back(counts[t - 1]);
    }
    d.cov = Covariance::diagonal(std::vector<double>(14, 15.0));
    return d;
}

inline constexpr double kBoardingSchoolPopulation = 763.0;

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
    }
    return out;
}
}  // namespace detail

// Reads a dataset CSV. Header tokens must be x, x2, x3, ... then y, then
// sigma. sigma entries are per-point standard deviations.
inline DataSet load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError("dataset file is empty: " + path);
    const auto header = detail::split_csv_line(line);
    int nx = 0;
    std::size_t pos = 0;
    while (pos < header.size() && header[pos].rfind("x", 0) == 0 && header[pos] != "y") {
        const std::string suffix = header[pos].substr(1);
        if (!suffix.empty() && suffix != std::to_string(pos + 1))
            throw InputError("dataset header: unexpected column '" + header[pos] + "'");
        ++nx;
        ++pos;
    }
    if (nx == 0) throw InputError("dataset header must start with an x column");
    if (pos >= header.size() || header[pos] != "y")
        throw InputError("dataset header: expected 'y' after x columns");
    ++pos;
    if (pos >= header.size() || header[pos] != "sigma")
        throw InputError("dataset header: expected 'sigma' after y column");
    ++pos;
    if (pos != header.size())
        throw InputError("dataset header: trailing columns are not supported");

    DataSet d;
    std::vector<double> sigmas;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = detail::split_csv_line(line);
        if (static_cast<int>(cells.size()) != nx + 2)
            throw InputError("dataset line " + std::to_string(lineno) + ": expected " +
                             std::to_string(nx + 2) + " columns");
        std::vector<double> x(nx);
        try {
            for (int i = 0; i < nx; ++i) x[i] = std::stod(cells[i]);
            d.ys.push_back(std::stod(cells[nx]));
            sigmas.push_back(std::stod(cells[nx + 1]));
        } catch (const std::exception&) {
            throw InputError("dataset line " + std::to_string(lineno) + ": malformed number");
        }
        d.xs.push_back(std::move(x));
    }
    if (d.ys.empty()) throw InputError("dataset has no data rows: " + path);
    d.cov = Covariance::diagonal(std::move(sigmas));
    d.validate();
    return d;
}

}  // namespace confbound
