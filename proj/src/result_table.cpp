// SPDX-License-Identifier: MIT
//
// mwrelay — result serialization implementation.

#include "mwrelay/result_table.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "json.hpp"

namespace mwrelay {

std::string format_sig9(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

std::string to_csv(const ResultTable& table) {
    std::string out;
    for (const auto& [k, v] : table.config) out += "# config: " + k + "=" + v + "\n";
    for (const auto& [k, v] : table.notes) out += "# " + k + ": " + v + "\n";
    for (const auto& [k, v] : table.derived) out += "# " + k + ": " + format_sig9(v) + "\n";
    if (table.undersampled) out += "# undersampled: 1\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out += ",";
        out += table.columns[c];
    }
    out += "\n";
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ",";
            out += format_sig9(row[c]);
        }
        out += "\n";
    }
    return out;
}

std::string to_json(const ResultTable& table) {
    nlohmann::ordered_json j;
    j["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : table.config) j["config"][k] = v;
    for (const auto& [k, v] : table.notes) j[k] = v;
    j["columns"] = table.columns;
    j["rows"] = table.rows;
    j["derived"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : table.derived) j["derived"][k] = v;
    j["undersampled"] = table.undersampled;
    return j.dump(2) + "\n";
}

std::string json_mirror_path(const std::string& csv_path) {
    if (csv_path.size() >= 4 && csv_path.compare(csv_path.size() - 4, 4, ".csv") == 0)
        return csv_path.substr(0, csv_path.size() - 4) + ".json";
    return csv_path + ".json";
}

void write_results(const ResultTable& table, const std::string& path, bool json_mirror) {
    if (path.empty() || path == "-") {
        std::cout << to_csv(table);
        if (json_mirror) std::cout << to_json(table);
        return;
    }
    {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("out: cannot open '" + path + "' for writing");
        f << to_csv(table);
        if (!f) throw std::runtime_error("out: write failed for '" + path + "'");
    }
    if (json_mirror) {
        const std::string jpath = json_mirror_path(path);
        std::ofstream f(jpath, std::ios::binary);
        if (!f) throw std::runtime_error("out: cannot open '" + jpath + "' for writing");
        f << to_json(table);
        if (!f) throw std::runtime_error("out: write failed for '" + jpath + "'");
    }
}

}  // namespace mwrelay
