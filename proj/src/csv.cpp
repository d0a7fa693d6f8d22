#include "ensq/csv.hpp"

#include <cstdio>

namespace ensq::csv {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

Writer::Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("csv: cannot open '" + path + "' for writing");
}

void Writer::comment(const std::string& line) { out_ << "# " << line << "\n"; }

void Writer::key_value(const std::string& key, const std::string& value) {
    out_ << "# " << key << " = " << value << "\n";
}

void Writer::key_value(const std::string& key, double value) {
    key_value(key, format_number(value));
}

void Writer::header(const std::vector<std::string>& columns) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out_ << ',';
        out_ << columns[i];
    }
    out_ << '\n';
}

void Writer::row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_ << ',';
        out_ << format_number(values[i]);
    }
    out_ << '\n';
}

} // namespace ensq::csv
