#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdli/errors.hpp"
#include "tdli/shots.hpp"

// Result persistence. Three formats, all deterministic for a fixed payload:
//   - CSV: '#'-prefixed metadata lines, a units line, one header row, then
//     %.17g numbers (17 significant digits round-trip doubles exactly).
//   - JSON mirror of the same table, bit-exact round trip.
//   - JSON-lines shot streams: one header object, then one object per shot;
//     times serialized in ns and energies in mJ to match how the quantities
//     are usually quoted.
// Config digests are 64-bit FNV-1a over the canonical (key-sorted) JSON
// encoding, so semantically equal configs hash identically.

namespace tdli {

using json = nlohmann::json;

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// --- config digest ---------------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// nlohmann::json stores objects key-sorted, so dump() is canonical for any
// key order in the source text.
inline std::string config_digest(const json& config) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config.dump())));
    return buf;
}

// --- tabular results -------------------------------------------------------

struct Column {
    std::string name;
    std::string unit;
    std::vector<double> values;
};

struct Table {
    std::vector<Column> columns;
    std::map<std::string, std::string> metadata;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().values.size(); }

    void validate() const {
        for (const Column& c : columns)
            if (c.values.size() != rows())
                throw std::logic_error("Table: ragged columns");
    }
};

inline void write_csv(std::ostream& os, const Table& t) {
    t.validate();
    for (const auto& [k, v] : t.metadata) os << "# " << k << ": " << v << "\n";
    os << "# units:";
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        os << (c ? "," : " ") << t.columns[c].unit;
    os << "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        os << (c ? "," : "") << t.columns[c].name;
    os << "\n";
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.columns.size(); ++c)
            os << (c ? "," : "") << format_double(t.columns[c].values[r]);
        os << "\n";
    }
}

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
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    std::size_t b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
}

} // namespace detail

inline Table read_csv(std::istream& is) {
    Table t;
    std::string line;
    std::vector<std::string> units;
    bool have_header = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string body = detail::trim(line.substr(1));
            const std::size_t colon = body.find(':');
            if (colon == std::string::npos) continue;
            const std::string key = detail::trim(body.substr(0, colon));
            const std::string val = detail::trim(body.substr(colon + 1));
            if (key == "units") {
                for (const std::string& u : detail::split_csv_line(val))
                    units.push_back(detail::trim(u));
            } else {
                t.metadata[key] = val;
            }
            continue;
        }
        if (!have_header) {
            const auto names = detail::split_csv_line(line);
            for (std::size_t c = 0; c < names.size(); ++c) {
                Column col;
                col.name = detail::trim(names[c]);
                col.unit = c < units.size() ? units[c] : "";
                t.columns.push_back(col);
            }
            have_header = true;
            continue;
        }
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != t.columns.size())
            throw config_error("CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(t.columns.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            char* end = nullptr;
            const double v = std::strtod(cells[c].c_str(), &end);
            if (end == cells[c].c_str())
                throw config_error("CSV cell is not a number: '" + cells[c] + "'");
            t.columns[c].values.push_back(v);
        }
    }
    if (!have_header) throw config_error("CSV has no header row");
    return t;
}

inline json table_to_json(const Table& t) {
    t.validate();
    json j;
    j["metadata"] = t.metadata;
    j["columns"] = json::array();
    for (const Column& c : t.columns)
        j["columns"].push_back({{"name", c.name}, {"unit", c.unit}, {"values", c.values}});
    return j;
}

inline Table table_from_json(const json& j) {
    Table t;
    if (j.contains("metadata"))
        for (const auto& [k, v] : j.at("metadata").items()) t.metadata[k] = v.get<std::string>();
    for (const json& cj : j.at("columns")) {
        Column c;
        c.name = cj.at("name").get<std::string>();
        c.unit = cj.value("unit", "");
        c.values = cj.at("values").get<std::vector<double>>();
        t.columns.push_back(std::move(c));
    }
    t.validate();
    return t;
}

inline void write_table_file(const std::string& path, const Table& t) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot open for writing: " + path);
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
        os << table_to_json(t).dump(2) << "\n";
    else
        write_csv(os, t);
    if (!os) throw config_error("write failed: " + path);
}

inline Table read_table_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open: " + path);
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
        json j;
        try {
            is >> j;
        } catch (const json::exception& e) {
            throw config_error(path + ": " + e.what());
        }
        return table_from_json(j);
    }
    return read_csv(is);
}

// --- shot streams ----------------------------------------------------------

inline constexpr const char* shots_schema = "ogi-shots/1";

struct ShotStreamHeader {
    std::string schema = shots_schema;
    std::uint64_t seed = 0;
    std::string truth_digest; // digest of the generating config
    std::vector<int> bins;    // cluster sizes, one per counts entry
};

inline void write_shots_jsonl(std::ostream& os, const ShotStreamHeader& h,
                              const std::vector<ShotRecord>& shots) {
    json hj;
    hj["schema"] = h.schema;
    hj["seed"] = h.seed;
    hj["truth_digest"] = h.truth_digest;
    hj["bins"] = h.bins;
    hj["n_shots"] = shots.size();
    os << hj.dump() << "\n";
    for (const ShotRecord& s : shots) {
        json j;
        j["id"] = s.shot_id;
        j["t_ns"] = {s.pulse_times_s[0] * 1e9, s.pulse_times_s[1] * 1e9,
                     s.pulse_times_s[2] * 1e9};
        j["e_mj"] = {s.pulse_energies_j[0] * 1e3, s.pulse_energies_j[1] * 1e3,
                     s.pulse_energies_j[2] * 1e3};
        j["counts"] = s.counts;
        os << j.dump() << "\n";
    }
}

struct ShotStream {
    ShotStreamHeader header;
    std::vector<ShotRecord> shots;
};

inline ShotStream read_shots_jsonl(std::istream& is) {
    ShotStream out;
    std::string line;
    bool have_header = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw config_error(std::string("shot stream: ") + e.what());
        }
        if (!have_header) {
            out.header.schema = j.value("schema", "");
            if (out.header.schema != shots_schema)
                throw config_error("shot stream: unsupported schema '" + out.header.schema + "'");
            out.header.seed = j.value("seed", std::uint64_t{0});
            out.header.truth_digest = j.value("truth_digest", "");
            if (j.contains("bins")) out.header.bins = j.at("bins").get<std::vector<int>>();
            have_header = true;
            continue;
        }
        ShotRecord s;
        s.shot_id = j.at("id").get<std::uint64_t>();
        const auto t = j.at("t_ns").get<std::array<double, 3>>();
        const auto e = j.at("e_mj").get<std::array<double, 3>>();
        for (int k = 0; k < 3; ++k) {
            s.pulse_times_s[static_cast<std::size_t>(k)] = t[static_cast<std::size_t>(k)] * 1e-9;
            s.pulse_energies_j[static_cast<std::size_t>(k)] = e[static_cast<std::size_t>(k)] * 1e-3;
        }
        s.counts = j.at("counts").get<std::vector<std::uint32_t>>();
        out.shots.push_back(std::move(s));
    }
    if (!have_header) throw config_error("shot stream: missing header line");
    return out;
}

inline void write_shots_file(const std::string& path, const ShotStreamHeader& h,
                             const std::vector<ShotRecord>& shots) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot open for writing: " + path);
    write_shots_jsonl(os, h, shots);
    if (!os) throw config_error("write failed: " + path);
}

inline ShotStream read_shots_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open: " + path);
    return read_shots_jsonl(is);
}

} // namespace tdli
