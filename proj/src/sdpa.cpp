#include "volopt/sdpa.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace volopt {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void emit_entry(std::string& out, int matno, int blkno, int i, int j, double value) {
  if (value == 0.0) return;
  out += std::to_string(matno);
  out += ' ';
  out += std::to_string(blkno);
  out += ' ';
  out += std::to_string(i);
  out += ' ';
  out += std::to_string(j);
  out += ' ';
  out += fmt(value);
  out += '\n';
}

// Matrix-space coefficient of svec coordinate `flat` of a PSD block: the
// stored value carries sqrt(2) on off-diagonals, the file stores plain
// symmetric-matrix entries.
void svec_to_entry(Eigen::Index flat, int* i, int* j, double* scale) {
  int col = 0;
  while (svec_index(0, col + 1) <= flat) ++col;
  const int row = static_cast<int>(flat - svec_index(0, col));
  *i = row;
  *j = col;
  *scale = (row == col) ? 1.0 : 1.0 / kSqrt2;
}

}  // namespace

std::string sdpa_text(const ConicProgram& prog) {
  prog.validate();
  const int nvar = prog.num_vars;
  const auto neq = static_cast<int>(prog.b.size());
  const int ncone = static_cast<int>(prog.blocks.size());
  const int nblock = ncone + (neq > 0 ? 1 : 0);

  std::string out;
  out += "* volopt conic program\n";
  out += std::string("* volopt sense=") + (prog.maximize ? "max" : "min") + "\n";
  out += "* volopt eqrows=" + std::to_string(neq) + "\n";
  out += std::to_string(nvar) + "\n";
  out += std::to_string(nblock) + "\n";

  for (int k = 0; k < ncone; ++k) {
    const ConeBlock& blk = prog.blocks[static_cast<size_t>(k)];
    if (k > 0) out += ' ';
    out += std::to_string(blk.type == ConeType::PSD ? blk.size : -blk.size);
  }
  if (neq > 0) {
    if (ncone > 0) out += ' ';
    out += std::to_string(-2 * neq);
  }
  out += '\n';

  for (int i = 0; i < nvar; ++i) {
    if (i > 0) out += ' ';
    out += fmt(prog.maximize ? -prog.c[i] : prog.c[i]);
  }
  out += '\n';

  // matno 0 holds F_0 = -(constant part); matno v holds the coefficient of
  // decision variable v.  Entries grouped by matrix, then block.
  for (int matno = 0; matno <= nvar; ++matno) {
    for (int k = 0; k < ncone; ++k) {
      const ConeBlock& blk = prog.blocks[static_cast<size_t>(k)];
      if (blk.type == ConeType::PSD) {
        int i = 0, j = 0;
        double scale = 1.0;
        if (matno == 0) {
          for (Eigen::Index f = 0; f < blk.d.size(); ++f) {
            if (blk.d[f] == 0.0) continue;
            svec_to_entry(f, &i, &j, &scale);
            emit_entry(out, 0, k + 1, i + 1, j + 1, -blk.d[f] * scale);
          }
        } else {
          for (Eigen::SparseMatrix<double>::InnerIterator it(blk.B, matno - 1); it; ++it) {
            svec_to_entry(it.row(), &i, &j, &scale);
            emit_entry(out, matno, k + 1, i + 1, j + 1, it.value() * scale);
          }
        }
      } else {
        if (matno == 0) {
          for (Eigen::Index f = 0; f < blk.d.size(); ++f) {
            emit_entry(out, 0, k + 1, static_cast<int>(f) + 1, static_cast<int>(f) + 1,
                       -blk.d[f]);
          }
        } else {
          for (Eigen::SparseMatrix<double>::InnerIterator it(blk.B, matno - 1); it; ++it) {
            emit_entry(out, matno, k + 1, static_cast<int>(it.row()) + 1,
                       static_cast<int>(it.row()) + 1, it.value());
          }
        }
      }
    }
    if (neq > 0) {
      // Paired rows 2t+1 / 2t+2: A_t gamma - b_t >= 0 and its negation.
      if (matno == 0) {
        for (int t = 0; t < neq; ++t) {
          emit_entry(out, 0, nblock, 2 * t + 1, 2 * t + 1, prog.b[t]);
          emit_entry(out, 0, nblock, 2 * t + 2, 2 * t + 2, -prog.b[t]);
        }
      } else {
        for (Eigen::SparseMatrix<double>::InnerIterator it(prog.A, matno - 1); it; ++it) {
          const int t = static_cast<int>(it.row());
          emit_entry(out, matno, nblock, 2 * t + 1, 2 * t + 1, it.value());
          emit_entry(out, matno, nblock, 2 * t + 2, 2 * t + 2, -it.value());
        }
      }
    }
  }
  return out;
}

void export_sdpa(const ConicProgram& prog, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("sdpa: cannot open '" + path + "' for writing");
  f << sdpa_text(prog);
  f.flush();
  if (!f) throw std::runtime_error("sdpa: write to '" + path + "' failed");
}

namespace {

// Splits a vector line, tolerating the {,}, decorations SDPLIB files use.
std::vector<double> parse_numbers(std::string line, int lineno, const char* what) {
  for (char& ch : line) {
    if (ch == '{' || ch == '}' || ch == ',' || ch == '(' || ch == ')') ch = ' ';
  }
  std::istringstream ss(line);
  std::vector<double> vals;
  double v = 0.0;
  while (ss >> v) vals.push_back(v);
  std::string rest;
  if (ss.clear(), ss >> rest) {
    throw std::runtime_error("sdpa: line " + std::to_string(lineno) + ": bad " + what);
  }
  return vals;
}

struct RawEntry {
  int matno, blkno, i, j;
  double value;
};

}  // namespace

ConicProgram parse_sdpa(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;

  bool sense_max = false;
  long hinted_eqrows = -1;  // -1: no hint, keep every block as a cone

  // Header: comments, then mDIM / nBLOCK / blockstruct / objective.
  long mdim = -1, nblock = -1;
  std::vector<long> blockstruct;
  std::vector<double> cvec;
  int header_stage = 0;
  std::vector<RawEntry> entries;

  while (std::getline(in, line)) {
    ++lineno;
    size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    const char first = line[pos];
    if (first == '*' || first == '"') {
      if (line.find("volopt sense=max") != std::string::npos) sense_max = true;
      const size_t eq = line.find("volopt eqrows=");
      if (eq != std::string::npos) {
        hinted_eqrows = std::strtol(line.c_str() + eq + 14, nullptr, 10);
      }
      continue;
    }
    if (header_stage == 0) {
      const auto vals = parse_numbers(line, lineno, "mDIM line");
      if (vals.size() != 1 || vals[0] < 1) {
        throw std::runtime_error("sdpa: line " + std::to_string(lineno) + ": bad mDIM line");
      }
      mdim = static_cast<long>(vals[0]);
      header_stage = 1;
    } else if (header_stage == 1) {
      const auto vals = parse_numbers(line, lineno, "nBLOCK line");
      if (vals.size() != 1 || vals[0] < 1) {
        throw std::runtime_error("sdpa: line " + std::to_string(lineno) + ": bad nBLOCK line");
      }
      nblock = static_cast<long>(vals[0]);
      header_stage = 2;
    } else if (header_stage == 2) {
      const auto vals = parse_numbers(line, lineno, "blockstruct line");
      if (static_cast<long>(vals.size()) != nblock) {
        throw std::runtime_error("sdpa: line " + std::to_string(lineno) +
                                 ": blockstruct needs " + std::to_string(nblock) + " entries");
      }
      for (double v : vals) {
        const long s = static_cast<long>(v);
        if (s == 0) {
          throw std::runtime_error("sdpa: line " + std::to_string(lineno) + ": zero block size");
        }
        blockstruct.push_back(s);
      }
      header_stage = 3;
    } else if (header_stage == 3) {
      cvec = parse_numbers(line, lineno, "objective line");
      if (static_cast<long>(cvec.size()) != mdim) {
        throw std::runtime_error("sdpa: line " + std::to_string(lineno) + ": objective needs " +
                                 std::to_string(mdim) + " entries");
      }
      header_stage = 4;
    } else {
      const auto vals = parse_numbers(line, lineno, "entry line");
      if (vals.size() != 5) {
        throw std::runtime_error("sdpa: line " + std::to_string(lineno) +
                                 ": entry needs `matno blkno i j value`");
      }
      RawEntry e{static_cast<int>(vals[0]), static_cast<int>(vals[1]), static_cast<int>(vals[2]),
                 static_cast<int>(vals[3]), vals[4]};
      if (e.matno < 0 || e.matno > mdim || e.blkno < 1 || e.blkno > nblock) {
        throw std::runtime_error("sdpa: line " + std::to_string(lineno) +
                                 ": matrix or block number out of range");
      }
      const long bs = blockstruct[static_cast<size_t>(e.blkno - 1)];
      const long side = std::labs(bs);
      if (e.i < 1 || e.j < e.i || e.j > side || (bs < 0 && e.i != e.j)) {
        throw std::runtime_error("sdpa: line " + std::to_string(lineno) + ": bad entry indices");
      }
      entries.push_back(e);
    }
  }
  if (header_stage < 4) throw std::runtime_error("sdpa: truncated header");

  // The trailing block is the paired equality encoding only when hinted.
  const bool fold_eq = hinted_eqrows > 0;
  if (fold_eq) {
    const long bs = blockstruct.back();
    if (bs != -2 * hinted_eqrows) {
      throw std::runtime_error("sdpa: eqrows hint does not match the trailing block");
    }
  }
  const size_t ncone = blockstruct.size() - (fold_eq ? 1 : 0);

  ConicProgram prog;
  prog.num_vars = static_cast<int>(mdim);
  prog.maximize = sense_max;
  prog.c = Eigen::VectorXd::Zero(mdim);
  for (long i = 0; i < mdim; ++i) {
    prog.c[i] = sense_max ? -cvec[static_cast<size_t>(i)] : cvec[static_cast<size_t>(i)];
  }

  const long neq = fold_eq ? hinted_eqrows : 0;
  prog.b = Eigen::VectorXd::Zero(neq);
  std::vector<Eigen::Triplet<double>> a_trip;

  std::vector<std::vector<Eigen::Triplet<double>>> b_trip(ncone);
  prog.blocks.resize(ncone);
  for (size_t k = 0; k < ncone; ++k) {
    const long bs = blockstruct[k];
    prog.blocks[k].type = bs > 0 ? ConeType::PSD : ConeType::Nonnegative;
    prog.blocks[k].size = static_cast<int>(std::labs(bs));
    const Eigen::Index rows =
        bs > 0 ? svec_len(prog.blocks[k].size) : static_cast<Eigen::Index>(prog.blocks[k].size);
    prog.blocks[k].d = Eigen::VectorXd::Zero(rows);
    prog.blocks[k].B.resize(rows, mdim);
  }

  for (const RawEntry& e : entries) {
    const size_t kb = static_cast<size_t>(e.blkno - 1);
    if (fold_eq && kb == ncone) {
      // Row 2t+1 carries A_t gamma - b_t; the paired negation is implied.
      if (e.i % 2 == 0) continue;
      const int t = (e.i - 1) / 2;
      if (e.matno == 0) {
        prog.b[t] = e.value;
      } else {
        a_trip.emplace_back(t, e.matno - 1, e.value);
      }
      continue;
    }
    const ConeBlock& blk = prog.blocks[kb];
    Eigen::Index flat;
    double scale;
    if (blk.type == ConeType::PSD) {
      flat = svec_index(e.i - 1, e.j - 1);
      scale = (e.i == e.j) ? 1.0 : kSqrt2;
    } else {
      flat = e.i - 1;
      scale = 1.0;
    }
    if (e.matno == 0) {
      prog.blocks[kb].d[flat] = -e.value * scale;
    } else {
      b_trip[kb].emplace_back(static_cast<int>(flat), e.matno - 1, e.value * scale);
    }
  }

  prog.A.resize(neq, mdim);
  prog.A.setFromTriplets(a_trip.begin(), a_trip.end());
  for (size_t k = 0; k < ncone; ++k) {
    prog.blocks[k].B.setFromTriplets(b_trip[k].begin(), b_trip[k].end());
  }
  prog.validate();
  return prog;
}

ConicProgram import_sdpa(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("sdpa: cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_sdpa(buf.str());
}

}  // namespace volopt
