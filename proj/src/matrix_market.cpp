#include "shiftstab/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace shiftstab {

namespace {

[[noreturn]] void fail(const std::string& path, long line, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

enum class Field { real, complex_, integer, pattern };
enum class Symmetry { general, symmetric, hermitian, skew };

}  // namespace

SparseMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::string header;
    long lineno = 1;
    if (!std::getline(in, header)) fail(path, lineno, "empty file");
    std::istringstream hs(header);
    std::string banner, object, format, field_s, sym_s;
    hs >> banner >> object >> format >> field_s >> sym_s;
    if (banner != "%%MatrixMarket" || lower(object) != "matrix")
        fail(path, lineno, "not a MatrixMarket matrix header");
    if (lower(format) != "coordinate")
        fail(path, lineno, "only coordinate format is supported");

    Field field;
    const std::string f = lower(field_s);
    if (f == "real") field = Field::real;
    else if (f == "complex") field = Field::complex_;
    else if (f == "integer") field = Field::integer;
    else if (f == "pattern") field = Field::pattern;
    else fail(path, lineno, "unknown field type '" + field_s + "'");

    Symmetry sym;
    const std::string sy = lower(sym_s);
    if (sy == "general") sym = Symmetry::general;
    else if (sy == "symmetric") sym = Symmetry::symmetric;
    else if (sy == "hermitian") sym = Symmetry::hermitian;
    else if (sy == "skew-symmetric") sym = Symmetry::skew;
    else fail(path, lineno, "unknown symmetry '" + sym_s + "'");

    std::string line;
    long rows = -1, cols = -1, nnz = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ls(line);
        if (!(ls >> rows >> cols >> nnz)) fail(path, lineno, "bad size line");
        break;
    }
    if (rows < 0) fail(path, lineno, "missing size line");
    if (rows == 0 || cols == 0) fail(path, lineno, "zero-sized matrix");

    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(static_cast<size_t>(sym == Symmetry::general ? nnz : 2 * nnz));
    long seen = 0;
    while (seen < nnz) {
        if (!std::getline(in, line)) fail(path, lineno + 1, "truncated entry list");
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        const char* p = line.c_str();
        char* end = nullptr;
        const long i = std::strtol(p, &end, 10);
        if (end == p) fail(path, lineno, "bad row index");
        p = end;
        const long j = std::strtol(p, &end, 10);
        if (end == p) fail(path, lineno, "bad column index");
        p = end;
        double re = 1.0, im = 0.0;
        if (field != Field::pattern) {
            re = std::strtod(p, &end);
            if (end == p) fail(path, lineno, "bad value");
            p = end;
            if (field == Field::complex_) {
                im = std::strtod(p, &end);
                if (end == p) fail(path, lineno, "bad imaginary part");
            }
        }
        if (i < 1 || i > rows || j < 1 || j > cols)
            fail(path, lineno, "index out of range");
        const Complex v(re, im);
        trip.emplace_back(i - 1, j - 1, v);
        if (i != j) {
            if (sym == Symmetry::symmetric) trip.emplace_back(j - 1, i - 1, v);
            else if (sym == Symmetry::hermitian) trip.emplace_back(j - 1, i - 1, std::conj(v));
            else if (sym == Symmetry::skew) trip.emplace_back(j - 1, i - 1, -v);
        }
        ++seen;
    }

    SparseMatrix A(rows, cols);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    return A;
}

void write_matrix_market(const std::string& path, const SparseMatrix& A) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(out, "%%%%MatrixMarket matrix coordinate complex general\n");
    std::fprintf(out, "%ld %ld %ld\n", static_cast<long>(A.rows()),
                 static_cast<long>(A.cols()), static_cast<long>(A.nonZeros()));
    for (Index row = 0; row < A.outerSize(); ++row)
        for (SparseMatrix::InnerIterator it(A, row); it; ++it)
            std::fprintf(out, "%ld %ld %.17g %.17g\n", static_cast<long>(it.row() + 1),
                         static_cast<long>(it.col() + 1), it.value().real(), it.value().imag());
    if (std::fclose(out) != 0) throw std::runtime_error("write failed on " + path);
}

Vector read_vector_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<Complex> vals;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double re = 0.0, im = 0.0;
        if (!(ls >> re)) fail(path, lineno, "bad vector entry");
        ls >> im;
        vals.emplace_back(re, im);
    }
    Vector v(static_cast<Index>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i) v[static_cast<Index>(i)] = vals[i];
    return v;
}

}  // namespace shiftstab
