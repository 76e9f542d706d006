#include "qforma/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qforma/error.hpp"

namespace qforma {

namespace {

void check_dim(int p) {
  if (p < 1) fail(ErrorKind::size, "matrix dimension must be >= 1");
  if (p > kMaxDim)
    fail(ErrorKind::size,
         "matrix dimension " + std::to_string(p) + " exceeds cap " +
             std::to_string(kMaxDim));
}

// One value, 17 significant digits: round-trips any double exactly.
std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SymmetricMatrix::SymmetricMatrix(int p, std::vector<double> entries)
    : p_(p), entries_(std::move(entries)) {
  check_dim(p);
  if (entries_.size() != static_cast<std::size_t>(p_) * p_)
    fail(ErrorKind::bad_input, "entry count does not match dimension");
  double max_abs = 0.0;
  for (double v : entries_) {
    if (!std::isfinite(v))
      fail(ErrorKind::bad_input, "matrix entries must be finite");
    max_abs = std::max(max_abs, std::fabs(v));
  }
  const double tol = 1e-12 * std::max(1.0, max_abs);
  for (int j = 0; j < p_; ++j)
    for (int k = j + 1; k < p_; ++k)
      if (std::fabs(entries_[index(j, k)] - entries_[index(k, j)]) > tol)
        fail(ErrorKind::bad_input,
             "matrix is not symmetric at (" + std::to_string(j + 1) + "," +
                 std::to_string(k + 1) + ")");
}

double SymmetricMatrix::trace() const {
  double s = 0.0, c = 0.0;
  for (int j = 0; j < p_; ++j) {
    double y = entries_[index(j, j)] - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

double SymmetricMatrix::max_abs_entry() const {
  double m = 0.0;
  for (double v : entries_) m = std::max(m, std::fabs(v));
  return m;
}

SymmetricMatrix SymmetricMatrix::scaled(double factor) const {
  if (!std::isfinite(factor))
    fail(ErrorKind::bad_input, "scale factor must be finite");
  std::vector<double> e(entries_);
  for (double& v : e) v *= factor;
  return SymmetricMatrix(p_, std::move(e));
}

SymmetricMatrix gen_identity(int p) {
  check_dim(p);
  std::vector<double> e(static_cast<std::size_t>(p) * p, 0.0);
  for (int j = 0; j < p; ++j) e[static_cast<std::size_t>(j) * p + j] = 1.0;
  return SymmetricMatrix(p, std::move(e));
}

SymmetricMatrix gen_zero(int p) {
  check_dim(p);
  return SymmetricMatrix(p,
                         std::vector<double>(static_cast<std::size_t>(p) * p));
}

SymmetricMatrix gen_ones(int p) {
  check_dim(p);
  return SymmetricMatrix(
      p, std::vector<double>(static_cast<std::size_t>(p) * p, 1.0));
}

SymmetricMatrix gen_block_ones(int m, int k) {
  if (m < 1 || k < 1)
    fail(ErrorKind::bad_input, "block counts must be >= 1");
  const long long pll = static_cast<long long>(m) * k;
  if (pll > kMaxDim)
    fail(ErrorKind::size, "m*k exceeds dimension cap");
  const int p = static_cast<int>(pll);
  std::vector<double> e(static_cast<std::size_t>(p) * p, 0.0);
  for (int b = 0; b < m; ++b) {
    const int off = b * k;
    for (int j = 0; j < k; ++j)
      for (int l = 0; l < k; ++l)
        e[static_cast<std::size_t>(off + j) * p + (off + l)] = 1.0;
  }
  return SymmetricMatrix(p, std::move(e));
}

double frobenius_norm_squared(const SymmetricMatrix& a) {
  double s = 0.0, c = 0.0;
  for (double v : a.entries()) {
    double y = v * v - c;
    double t = s + y;
    if (!std::isfinite(t))
      return t;  // saturate; Kahan compensation would otherwise turn inf into NaN
    c = (t - s) - y;
    s = t;
  }
  return s;
}

double frobenius_norm(const SymmetricMatrix& a) {
  return std::sqrt(frobenius_norm_squared(a));
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& tok, const std::string& path) {
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    while (pos < tok.size() &&
           (tok[pos] == ' ' || tok[pos] == '\t' || tok[pos] == '\r'))
      ++pos;
    if (pos != tok.size())
      fail(ErrorKind::bad_input, path + ": bad numeric token '" + tok + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (...) {
    fail(ErrorKind::bad_input, path + ": bad numeric token '" + tok + "'");
  }
}

long long parse_int(const std::string& tok, const std::string& path) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(tok, &pos);
    if (pos != tok.size())
      fail(ErrorKind::bad_input, path + ": bad integer token '" + tok + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (...) {
    fail(ErrorKind::bad_input, path + ": bad integer token '" + tok + "'");
  }
}

std::string read_first_line(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::bad_input, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorKind::bad_input, path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

SymmetricMatrix read_matrix(const std::string& path) {
  // Dense CSV headers are a single token "p"; triplet headers are "p nnz".
  std::istringstream hdr(read_first_line(path));
  std::string tok;
  int count = 0;
  while (hdr >> tok) ++count;
  if (count == 2) return read_matrix_triplet(path);
  return read_matrix_csv(path);
}

SymmetricMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::bad_input, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorKind::bad_input, path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const long long pll = parse_int(line, path);
  if (pll < 1 || pll > kMaxDim)
    fail(ErrorKind::size, path + ": dimension out of range");
  const int p = static_cast<int>(pll);
  std::vector<double> e;
  e.reserve(static_cast<std::size_t>(p) * p);
  for (int r = 0; r < p; ++r) {
    if (!std::getline(in, line))
      fail(ErrorKind::bad_input, path + ": expected " + std::to_string(p) +
                                     " rows, got " + std::to_string(r));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto toks = split(line, ',');
    if (static_cast<int>(toks.size()) != p)
      fail(ErrorKind::bad_input,
           path + ": row " + std::to_string(r + 1) + " has " +
               std::to_string(toks.size()) + " fields, expected " +
               std::to_string(p));
    for (auto& t : toks) e.push_back(parse_double(t, path));
  }
  return SymmetricMatrix(p, std::move(e));
}

SymmetricMatrix read_matrix_triplet(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::bad_input, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorKind::bad_input, path + ": empty file");
  std::istringstream hdr(line);
  std::string ptok, ntok;
  if (!(hdr >> ptok >> ntok))
    fail(ErrorKind::bad_input, path + ": header must be 'p nnz'");
  const long long pll = parse_int(ptok, path);
  const long long nnz = parse_int(ntok, path);
  if (pll < 1 || pll > kMaxDim)
    fail(ErrorKind::size, path + ": dimension out of range");
  if (nnz < 0) fail(ErrorKind::bad_input, path + ": negative nnz");
  const int p = static_cast<int>(pll);
  std::vector<double> e(static_cast<std::size_t>(p) * p, 0.0);
  for (long long t = 0; t < nnz; ++t) {
    if (!std::getline(in, line))
      fail(ErrorKind::bad_input, path + ": expected " + std::to_string(nnz) +
                                     " triplets, got " + std::to_string(t));
    std::istringstream ls(line);
    std::string itok, jtok, vtok;
    if (!(ls >> itok >> jtok >> vtok))
      fail(ErrorKind::bad_input,
           path + ": triplet line " + std::to_string(t + 1) + " malformed");
    const long long i = parse_int(itok, path);
    const long long j = parse_int(jtok, path);
    const double v = parse_double(vtok, path);
    if (i < 1 || i > p || j < 1 || j > p)
      fail(ErrorKind::bad_input,
           path + ": index out of range on line " + std::to_string(t + 2));
    if (i > j)
      fail(ErrorKind::bad_input,
           path + ": triplets must satisfy i <= j (upper triangle)");
    e[static_cast<std::size_t>(i - 1) * p + (j - 1)] = v;
    e[static_cast<std::size_t>(j - 1) * p + (i - 1)] = v;
  }
  return SymmetricMatrix(p, std::move(e));
}

void write_matrix_csv(const std::string& path, const SymmetricMatrix& a) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::bad_input, "cannot write '" + path + "'");
  const int p = a.dim();
  out << p << '\n';
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k < p; ++k) {
      if (k) out << ',';
      out << fmt17(a(j, k));
    }
    out << '\n';
  }
  if (!out) fail(ErrorKind::bad_input, "write failed for '" + path + "'");
}

void write_matrix_triplet(const std::string& path, const SymmetricMatrix& a) {
  const int p = a.dim();
  long long nnz = 0;
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j)
      if (a(i, j) != 0.0) ++nnz;
  std::ofstream out(path);
  if (!out) fail(ErrorKind::bad_input, "cannot write '" + path + "'");
  out << p << ' ' << nnz << '\n';
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j)
      if (a(i, j) != 0.0)
        out << (i + 1) << ' ' << (j + 1) << ' ' << fmt17(a(i, j)) << '\n';
  if (!out) fail(ErrorKind::bad_input, "write failed for '" + path + "'");
}

}  // namespace qforma
