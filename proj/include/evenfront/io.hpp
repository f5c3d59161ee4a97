#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "driver.hpp"
#include "linalg.hpp"
#include "mesh.hpp"
#include "metrics.hpp"

namespace evenfront {

struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// 17 significant digits: doubles survive the round trip bit-exactly.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

/// front.csv: one row per sample, lossless 17-digit rendering.
/// Columns: id, index, lambda_1..k, x_1..n, f_1..k, fnorm_1..k, status.
inline void write_front_csv(const std::string& path, const Front& front,
                            const AnsatzMesh* mesh = nullptr) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    if (front.samples.empty()) return;
    const int k = static_cast<int>(front.samples.front().f_raw.size());
    const int n = static_cast<int>(front.samples.front().x.size());
    os << "id,index";
    for (int i = 1; i <= k; ++i) os << ",lambda_" << i;
    for (int i = 1; i <= n; ++i) os << ",x_" << i;
    for (int i = 1; i <= k; ++i) os << ",f_" << i;
    for (int i = 1; i <= k; ++i) os << ",fnorm_" << i;
    os << ",status\n";
    for (const FrontSample& s : front.samples) {
        os << s.node << ',';
        if (mesh && s.node >= 0 && s.node < static_cast<int>(mesh->nodes.size())) {
            const auto& idx = mesh->nodes[s.node].index;
            for (std::size_t i = 0; i < idx.size(); ++i) os << (i ? "-" : "") << idx[i];
        } else {
            os << s.node;
        }
        for (int i = 0; i < k; ++i) os << ',' << detail::fmt(s.lambda[i]);
        for (int i = 0; i < n; ++i) os << ',' << detail::fmt(s.x[i]);
        for (int i = 0; i < k; ++i) os << ',' << detail::fmt(s.f_raw[i]);
        for (int i = 0; i < k; ++i) os << ',' << detail::fmt(s.f_norm[i]);
        os << ',' << (s.is_vertex ? "vertex" : to_string(s.status)) << '\n';
    }
}

struct LoadedFront {
    int k = 0;
    int n = 0;
    struct Row {
        int id = -1;
        std::string index;
        Vec lambda, x, f_raw, f_norm;
        std::string status;
    };
    std::vector<Row> rows;
};

inline LoadedFront read_front_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw parse_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw parse_error(path + ": empty file");
    const auto header = detail::split(line, ',');
    LoadedFront out;
    for (const auto& h : header) {
        if (h.rfind("lambda_", 0) == 0) ++out.k;
        if (h.rfind("x_", 0) == 0) ++out.n;
    }
    if (out.k < 2 || out.n < 1 || header.size() != static_cast<std::size_t>(3 + 3 * out.k + out.n))
        throw parse_error(path + ":1: unrecognized front header");

    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = detail::split(line, ',');
        if (cells.size() != header.size())
            throw parse_error(path + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(header.size()) + " fields, got " +
                              std::to_string(cells.size()));
        LoadedFront::Row row;
        try {
            std::size_t c = 0;
            row.id = std::stoi(cells[c++]);
            row.index = cells[c++];
            for (int i = 0; i < out.k; ++i) row.lambda.push_back(std::stod(cells[c++]));
            for (int i = 0; i < out.n; ++i) row.x.push_back(std::stod(cells[c++]));
            for (int i = 0; i < out.k; ++i) row.f_raw.push_back(std::stod(cells[c++]));
            for (int i = 0; i < out.k; ++i) row.f_norm.push_back(std::stod(cells[c++]));
            row.status = cells[c++];
        } catch (const std::exception&) {
            throw parse_error(path + ":" + std::to_string(lineno) + ": malformed number");
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

/// Debug dump: one line per node with multi-index, weights and the
/// adjacency pairs as axis:left:right triples.
inline void dump_mesh(const std::string& path, const AnsatzMesh& mesh) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    for (std::size_t p = 0; p < mesh.nodes.size(); ++p) {
        const MeshNode& node = mesh.nodes[p];
        os << p << ' ';
        for (std::size_t i = 0; i < node.index.size(); ++i) os << (i ? "-" : "") << node.index[i];
        os << ' ';
        for (std::size_t i = 0; i < node.weights.size(); ++i)
            os << (i ? "," : "") << detail::fmt(node.weights[i]);
        os << ' ';
        if (node.adjacency.empty()) {
            os << '-';
        } else {
            for (std::size_t i = 0; i < node.adjacency.size(); ++i) {
                const AdjacencyPair& pr = node.adjacency[i];
                os << (i ? ";" : "") << pr.axis << ':' << pr.left << ':' << pr.right;
            }
        }
        os << '\n';
    }
}

inline AnsatzMesh read_mesh_dump(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw parse_error("cannot open " + path);
    AnsatzMesh mesh;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string id_s, index_s, weights_s, pairs_s;
        if (!(ss >> id_s >> index_s >> weights_s >> pairs_s))
            throw parse_error(path + ":" + std::to_string(lineno) + ": malformed mesh line");
        MeshNode node;
        try {
            for (const auto& t : detail::split(index_s, '-')) node.index.push_back(std::stoi(t));
            for (const auto& t : detail::split(weights_s, ',')) node.weights.push_back(std::stod(t));
            if (pairs_s != "-") {
                for (const auto& group : detail::split(pairs_s, ';')) {
                    const auto f = detail::split(group, ':');
                    if (f.size() != 3) throw parse_error("bad pair");
                    node.adjacency.push_back({std::stoi(f[0]), std::stoi(f[1]), std::stoi(f[2])});
                }
            }
        } catch (const std::exception&) {
            throw parse_error(path + ":" + std::to_string(lineno) + ": malformed mesh line");
        }
        int positive = 0;
        for (int i : node.index)
            if (i > 0) ++positive;
        node.is_vertex = positive == 1;
        mesh.nodes.push_back(std::move(node));
    }
    if (!mesh.nodes.empty()) {
        mesh.k = static_cast<int>(mesh.nodes.front().index.size());
        mesh.resolution = 0;
        for (int i : mesh.nodes.front().index) mesh.resolution += i;
        mesh.anchors.assign(mesh.k, -1);
        for (std::size_t p = 0; p < mesh.nodes.size(); ++p)
            if (mesh.nodes[p].is_vertex)
                for (int i = 0; i < mesh.k; ++i)
                    if (mesh.nodes[p].index[i] > 0) mesh.anchors[i] = static_cast<int>(p);
    }
    return mesh;
}

struct RunReport {
    std::string problem;
    std::string mode;
    int points = 0;
    long long fe_total = 0;
    double fe_per_point = 0.0;
    int sweeps = 0;
    double evenness = 0.0;
    double hypervolume = 0.0;
    std::string hv_convention;
    Vec hv_reference;
    double residual_max = 0.0;
    double wall_time = 0.0;
    int converged = 0;
    std::map<std::string, long long> fe_by_phase;
    std::string note;
};

inline nlohmann::json report_to_json(const RunReport& r) {
    nlohmann::json j;
    j["problem"] = r.problem;
    j["mode"] = r.mode;
    j["points"] = r.points;
    j["fe_total"] = r.fe_total;
    j["fe_per_point"] = r.fe_per_point;
    j["sweeps"] = r.sweeps;
    j["converged"] = r.converged;
    j["evenness"] = std::isfinite(r.evenness) ? nlohmann::json(r.evenness) : nlohmann::json();
    j["hypervolume"]["value"] =
        std::isfinite(r.hypervolume) ? nlohmann::json(r.hypervolume) : nlohmann::json();
    j["hypervolume"]["convention"] = r.hv_convention;
    j["hypervolume"]["reference"] = r.hv_reference;
    j["residual_max"] =
        std::isfinite(r.residual_max) ? nlohmann::json(r.residual_max) : nlohmann::json();
    j["wall_time"] = r.wall_time;
    j["fe_by_phase"] = r.fe_by_phase;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

inline void write_report_json(const std::string& path, const RunReport& r) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << report_to_json(r).dump(2) << '\n';
}

/// Scatter plot of the normalized front. k = 2 plots the first two
/// objectives directly; k >= 3 uses an isometric projection of the first
/// three, with a fourth objective (when present) mapped to a red-blue fill.
inline void write_front_svg(const std::string& path, const std::vector<Vec>& f_norm) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    const int width = 560, height = 560, margin = 40;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (f_norm.empty()) {
        os << "</svg>\n";
        return;
    }
    const int k = static_cast<int>(f_norm.front().size());
    std::vector<std::pair<double, double>> uv;
    uv.reserve(f_norm.size());
    for (const Vec& f : f_norm) {
        if (k == 2) {
            uv.emplace_back(f[0], f[1]);
        } else {
            constexpr double c = 0.8660254037844386;  // cos(30 deg)
            uv.emplace_back((f[0] - f[1]) * c, (f[0] + f[1]) * 0.5 - f[2]);
        }
    }
    double umin = uv[0].first, umax = uv[0].first, vmin = uv[0].second, vmax = uv[0].second;
    for (const auto& [u, v] : uv) {
        umin = std::min(umin, u);
        umax = std::max(umax, u);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    const double du = std::max(1e-12, umax - umin), dv = std::max(1e-12, vmax - vmin);
    double c4min = 0.0, c4max = 1.0;
    if (k >= 4) {
        c4min = c4max = f_norm[0][3];
        for (const Vec& f : f_norm) {
            c4min = std::min(c4min, f[3]);
            c4max = std::max(c4max, f[3]);
        }
    }
    for (std::size_t i = 0; i < uv.size(); ++i) {
        const double px = margin + (uv[i].first - umin) / du * (width - 2 * margin);
        const double py = margin + (vmax - uv[i].second) / dv * (height - 2 * margin);
        std::string fill = "#4682b4";
        if (k >= 4) {
            const double t = (f_norm[i][3] - c4min) / std::max(1e-12, c4max - c4min);
            const int r = static_cast<int>(255 * t), b = static_cast<int>(255 * (1.0 - t));
            char buf[16];
            std::snprintf(buf, sizeof(buf), "#%02x00%02x", r, b);
            fill = buf;
        }
        os << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"3\" fill=\"" << fill
           << "\"/>\n";
    }
    os << "</svg>\n";
}

}  // namespace evenfront
