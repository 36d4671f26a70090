#include "shiftstab/signfun.hpp"

#include <cstdlib>
#include <fstream>

namespace shiftstab {

namespace {

[[noreturn]] void fail(const std::string& path, long line, const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

PartialFractionSpec read_partial_fraction(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open partial fraction file");

    PartialFractionSpec spec;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const char* p = line.c_str();
        while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
        if (*p == '\0' || *p == '#') continue;

        double vals[4];
        for (int i = 0; i < 4; ++i) {
            char* end = nullptr;
            vals[i] = std::strtod(p, &end);
            if (end == p)
                fail(path, lineno,
                     "expected four reals: weight_re weight_im pole_re pole_im");
            p = end;
        }
        while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
        if (*p != '\0' && *p != '#') fail(path, lineno, "trailing characters after four reals");

        spec.weights.emplace_back(vals[0], vals[1]);
        spec.poles.emplace_back(vals[2], vals[3]);
    }
    if (spec.weights.empty())
        throw std::runtime_error(path + ": no partial fraction terms found");
    return spec;
}

}  // namespace shiftstab
