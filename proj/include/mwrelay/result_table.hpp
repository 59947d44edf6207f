// SPDX-License-Identifier: MIT
//
// mwrelay — deterministic result serialization: CSV with config-echo comment
// lines and an optional JSON mirror. All numbers are written with 9
// significant digits, locale-independent, so identical runs produce
// byte-identical files.

#pragma once

#include <string>
#include <utility>
#include <vector>

namespace mwrelay {

struct ResultTable {
    // Echoed as `# config: key=value`; feeding these lines back as a config
    // file reproduces the run.
    std::vector<std::pair<std::string, std::string>> config;
    // Non-config annotations, echoed as `# key: value`.
    std::vector<std::pair<std::string, std::string>> notes;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    // Derived scalars, echoed as `# key: value` and mirrored to JSON.
    std::vector<std::pair<std::string, double>> derived;
    bool undersampled = false;
};

// Shortest decimal with 9 significant digits (std::to_chars, general form).
std::string format_sig9(double v);

std::string to_csv(const ResultTable& table);
std::string to_json(const ResultTable& table);

// Replaces a trailing ".csv" with ".json" (appends otherwise).
std::string json_mirror_path(const std::string& csv_path);

// Writes CSV to path ("-" or empty: stdout); optionally the JSON mirror.
void write_results(const ResultTable& table, const std::string& path, bool json_mirror);

}  // namespace mwrelay
