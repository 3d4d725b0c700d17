#include "rmab/lp/program.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "rmab/errors.hpp"

namespace rmab::lp {

namespace {

std::string exact(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

char sense_code(Sense s) {
  switch (s) {
    case Sense::Equal: return 'E';
    case Sense::LessEqual: return 'L';
    case Sense::GreaterEqual: return 'G';
  }
  return '?';
}

}  // namespace

std::vector<double> row_activity(const LpProgram& program, std::span<const double> x) {
  std::vector<double> act(program.num_rows(), 0.0);
  for (const auto& e : program.entries) act[e.row] += e.value * x[e.col];
  return act;
}

double max_violation(const LpProgram& program, std::span<const double> x) {
  double worst = 0.0;
  for (double v : x) worst = std::max(worst, -v);
  const auto act = row_activity(program, x);
  for (int i = 0; i < program.num_rows(); ++i) {
    const double diff = act[i] - program.rhs[i];
    switch (program.senses[i]) {
      case Sense::Equal: worst = std::max(worst, std::abs(diff)); break;
      case Sense::LessEqual: worst = std::max(worst, diff); break;
      case Sense::GreaterEqual: worst = std::max(worst, -diff); break;
    }
  }
  return worst;
}

void write_triplets(std::ostream& out, const LpProgram& program) {
  out << "lp " << program.num_rows() << ' ' << program.num_cols() << ' ' << program.entries.size() << ' '
      << (program.maximize ? "max" : "min") << '\n';
  for (int j = 0; j < program.num_cols(); ++j)
    if (program.objective[j] != 0.0) out << "c " << j << ' ' << exact(program.objective[j]) << '\n';
  for (int i = 0; i < program.num_rows(); ++i)
    out << "r " << i << ' ' << sense_code(program.senses[i]) << ' ' << exact(program.rhs[i]) << '\n';
  for (const auto& e : program.entries) out << e.row << ' ' << e.col << ' ' << exact(e.value) << '\n';
}

LpProgram read_triplets(std::istream& in) {
  LpProgram program;
  std::string tag, dir;
  int rows = 0, cols = 0;
  std::size_t nnz = 0;
  if (!(in >> tag >> rows >> cols >> nnz >> dir) || tag != "lp" || (dir != "max" && dir != "min"))
    throw UsageError("read_triplets: bad header");
  program.maximize = dir == "max";
  program.objective.assign(cols, 0.0);
  program.senses.assign(rows, Sense::Equal);
  program.rhs.assign(rows, 0.0);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == 'c') {
      int j;
      double v;
      ls >> tag >> j >> v;
      program.objective.at(j) = v;
    } else if (line[0] == 'r') {
      int i;
      char s;
      double v;
      ls >> tag >> i >> s >> v;
      program.senses.at(i) = s == 'E' ? Sense::Equal : s == 'L' ? Sense::LessEqual : Sense::GreaterEqual;
      program.rhs.at(i) = v;
    } else {
      Entry e;
      ls >> e.row >> e.col >> e.value;
      if (!ls) throw UsageError("read_triplets: bad entry line '" + line + "'");
      program.entries.push_back(e);
    }
  }
  if (program.entries.size() != nnz) throw UsageError("read_triplets: nonzero count mismatch");
  return program;
}

}  // namespace rmab::lp
