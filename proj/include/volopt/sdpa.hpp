#pragma once

#include <string>

#include "volopt/conic.hpp"

namespace volopt {

// Serialize a conic program as SDPA sparse text (.dat-s).
//
// The file encodes the standard SDPA problem
//   minimize  c^T x   s.t.   X = sum_i x_i F_i - F_0  block-diagonal PSD,
// with negative blockstruct entries marking diagonal (componentwise) blocks.
// Layout: optional leading comment lines, then mDIM, nBLOCK, the blockstruct
// line, the objective line, and one `matno blkno i j value` entry per nonzero
// upper-triangle coefficient (1-based indices, i <= j).
//
// Equality rows A gamma = b have no native SDPA form; they are emitted as a
// trailing diagonal block of paired rows (A gamma - b >= 0, b - A gamma >= 0).
// A maximize objective is emitted negated.  Both transformations are recorded
// in leading `* volopt ...` comment lines so that parse_sdpa can reconstruct
// the original program exactly; foreign SDPA readers simply ignore them and
// see an equivalent minimization problem.
std::string sdpa_text(const ConicProgram& prog);

// sdpa_text written to `path`.  Throws std::runtime_error on I/O failure.
void export_sdpa(const ConicProgram& prog, const std::string& path);

// Inverse of sdpa_text.  Accepts general SDPA sparse input (comments, braces
// and commas in the vector lines); when the volopt hint comments are present
// the equality block and objective sense are folded back, so
// parse_sdpa(sdpa_text(p)) reproduces p up to roundoff.  Throws
// std::runtime_error with a line reference on malformed input.
ConicProgram parse_sdpa(const std::string& text);

// parse_sdpa applied to the contents of `path`.
ConicProgram import_sdpa(const std::string& path);

}  // namespace volopt
