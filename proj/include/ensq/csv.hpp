// csv.hpp — deterministic CSV emission: 9 significant digits, '.' radix,
// ',' separator, '\n' line endings, '#'-prefixed metadata lines.

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "ensq/errors.hpp"

namespace ensq::csv {

std::string format_number(double v);

class Writer {
public:
    explicit Writer(const std::string& path);

    void comment(const std::string& line);
    void key_value(const std::string& key, const std::string& value);
    void key_value(const std::string& key, double value);
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);

private:
    std::ofstream out_;
};

} // namespace ensq::csv
