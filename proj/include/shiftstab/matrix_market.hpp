#pragma once

#include "shiftstab/types.hpp"

#include <string>

namespace shiftstab {

// Coordinate-format reader: real/complex/integer/pattern entries, with
// general/symmetric/hermitian/skew-symmetric storage expanded to explicit
// general form. Indices converted to 0-based. Parse errors carry the
// offending line number.
SparseMatrix read_matrix_market(const std::string& path);

// Writes coordinate complex general with round-trippable (17 digit) values.
void write_matrix_market(const std::string& path, const SparseMatrix& A);

// Plain-text vector: one "re" or "re im" pair per line, blank and # lines
// ignored.
Vector read_vector_lines(const std::string& path);

}  // namespace shiftstab
