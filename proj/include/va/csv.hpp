/**
 * @file csv.hpp
 * @brief Minimal comma-separated writer. Infinite values are written as `inf`.
 */
#pragma once

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <ios>
#include <locale>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace va {

[[nodiscard]] inline std::string format_number(double v, int precision = 10) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(precision);
    os << v;
    return os.str();
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write '" + path + "'");
        write_fields(header);
    }

    void row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

    void row(const std::vector<double>& values) {
        std::vector<std::string> fields;
        fields.reserve(values.size());
        for (double v : values) fields.push_back(format_number(v));
        write_fields(fields);
    }

    /// Text fields are quoted when they contain a comma, quote or newline.
    void write_fields(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            const std::string& f = fields[i];
            if (f.find_first_of(",\"\n") == std::string::npos) {
                out_ << f;
                continue;
            }
            out_ << '"';
            for (char ch : f) {
                if (ch == '"') out_ << '"';
                out_ << ch;
            }
            out_ << '"';
        }
        out_ << '\n';
        if (!out_) throw std::runtime_error("CSV write failed");
    }

private:
    std::ofstream out_;
};

}  // namespace va
