#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "depnet/discrete.hpp"
#include "depnet/model.hpp"

namespace depnet {

// Probabilities in model/joint files carry 17 significant digits, which
// round-trips doubles exactly; report numbers carry 6.
inline std::string fmt_g(double x, int sig_digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", sig_digits, x);
  return buf;
}

namespace detail {

// Lines are whitespace-tokenized; blank lines and '#' comments are skipped.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      tokens.clear();
      std::istringstream ss(line);
      std::string tok;
      while (ss >> tok) tokens.push_back(tok);
      if (tokens.empty() || tokens[0][0] == '#') continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error("line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::istream& in_;
  std::uint64_t line_no_ = 0;
};

inline int parse_int(const LineReader& r, const std::string& tok) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    r.fail("expected integer, got '" + tok + "'");
  }
}

inline double parse_double(const LineReader& r, const std::string& tok) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    r.fail("expected number, got '" + tok + "'");
  }
}

}  // namespace detail

// ----------------------------------------------------------------------
// Dataset text format:
//   vars <card_0> <card_1> ... <card_{n-1}>
//   <x_0> <x_1> ... <x_{n-1}>        (one line per row)
// ----------------------------------------------------------------------

inline void write_dataset(std::ostream& out, const Dataset& d) {
  out << "vars";
  for (int c : d.space.cards()) out << ' ' << c;
  out << '\n';
  for (const auto& row : d.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i];
    out << '\n';
  }
}

inline Dataset read_dataset(std::istream& in) {
  detail::LineReader r(in);
  std::vector<std::string> tok;
  if (!r.next(tok)) r.fail("empty dataset file");
  if (tok[0] != "vars" || tok.size() < 2) r.fail("expected 'vars <card...>' header");
  std::vector<int> cards;
  for (std::size_t k = 1; k < tok.size(); ++k) cards.push_back(detail::parse_int(r, tok[k]));
  VarSpace space(std::move(cards));

  std::vector<Assignment> rows;
  while (r.next(tok)) {
    if (tok.size() != static_cast<std::size_t>(space.size()))
      r.fail("expected " + std::to_string(space.size()) + " values per row");
    Assignment row(space.size());
    for (int i = 0; i < space.size(); ++i) row[i] = detail::parse_int(r, tok[i]);
    if (!space.valid(row)) r.fail("row value out of range");
    rows.push_back(std::move(row));
  }
  return Dataset(std::move(space), std::move(rows));
}

// ----------------------------------------------------------------------
// Joint table text format:
//   joint <n> <card_0> ... <card_{n-1}>
//   <prob>                            (one per line, index order)
// ----------------------------------------------------------------------

inline void write_joint(std::ostream& out, const JointTable& p) {
  out << "joint " << p.space().size();
  for (int c : p.space().cards()) out << ' ' << c;
  out << '\n';
  for (std::uint64_t x = 0; x < p.size(); ++x) out << fmt_g(p[x], 17) << '\n';
}

inline JointTable read_joint(std::istream& in) {
  detail::LineReader r(in);
  std::vector<std::string> tok;
  if (!r.next(tok)) r.fail("empty joint file");
  if (tok[0] != "joint" || tok.size() < 2) r.fail("expected 'joint <n> <card...>' header");
  const int n = detail::parse_int(r, tok[1]);
  if (static_cast<int>(tok.size()) != 2 + n) r.fail("expected " + std::to_string(n) + " cards");
  std::vector<int> cards;
  for (int k = 0; k < n; ++k) cards.push_back(detail::parse_int(r, tok[2 + k]));
  VarSpace space(std::move(cards));

  std::vector<double> probs;
  probs.reserve(space.total_states());
  while (r.next(tok)) {
    for (const auto& t : tok) probs.push_back(detail::parse_double(r, t));
  }
  if (probs.size() != space.total_states()) r.fail("wrong number of probabilities");
  return JointTable(std::move(space), std::move(probs));
}

// ----------------------------------------------------------------------
// Model text formats. Dependency network:
//   depnet <n>
//   node <i> inputs <ids...>
//   row <y-index> <prob...>           (one per input assignment)
//   ...
//   weights <c_0> ... <c_{n-1}>
// Bayesian network: same with header 'bayesnet' and 'parents' instead of
// 'inputs', and no weights line. Cardinalities are recovered from row
// widths. Undefined rows are serialized as 'nan' entries.
// ----------------------------------------------------------------------

namespace detail {

inline void write_node_block(std::ostream& out, const Cpt& cpt, const char* inputs_word) {
  out << "node " << cpt.child << ' ' << inputs_word;
  for (int id : cpt.inputs) out << ' ' << id;
  out << '\n';
  const auto rows = cpt.num_rows();
  for (std::uint64_t y = 0; y < rows; ++y) {
    out << "row " << y;
    for (int v = 0; v < cpt.child_card; ++v) {
      const double e = cpt.defined(y) ? cpt.row(y)[v] : std::numeric_limits<double>::quiet_NaN();
      out << ' ' << fmt_g(e, 17);
    }
    out << '\n';
  }
}

struct RawNode {
  int id = -1;
  std::vector<int> inputs;
  std::vector<std::vector<double>> rows;
};

// Parses the shared node/row structure after the header line. The first
// line that is neither 'node' nor 'row' is handed back through `pending`.
inline std::vector<RawNode> read_node_blocks(LineReader& r, int n, const char* inputs_word,
                                             std::vector<std::string>& pending) {
  std::vector<RawNode> nodes;
  std::vector<std::string> tok;
  while (r.next(tok)) {
    if (tok[0] == "node") {
      if (tok.size() < 3 || tok[2] != inputs_word)
        r.fail(std::string("expected 'node <i> ") + inputs_word + " ...'");
      RawNode node;
      node.id = parse_int(r, tok[1]);
      for (std::size_t k = 3; k < tok.size(); ++k) node.inputs.push_back(parse_int(r, tok[k]));
      nodes.push_back(std::move(node));
    } else if (tok[0] == "row") {
      if (nodes.empty()) r.fail("'row' before any 'node'");
      if (tok.size() < 4) r.fail("row needs an index and at least two entries");
      const auto y = static_cast<std::uint64_t>(parse_int(r, tok[1]));
      if (y != nodes.back().rows.size()) r.fail("row indices must be consecutive from 0");
      std::vector<double> row;
      for (std::size_t k = 2; k < tok.size(); ++k) row.push_back(parse_double(r, tok[k]));
      nodes.back().rows.push_back(std::move(row));
    } else {
      pending = tok;
      break;
    }
  }
  if (static_cast<int>(nodes.size()) != n) r.fail("expected " + std::to_string(n) + " nodes");
  return nodes;
}

// Recovers per-variable cardinalities from row widths, validates row
// counts against input cardinalities, and builds the CPTs.
inline std::vector<Cpt> assemble_cpts(const std::vector<RawNode>& nodes, int n) {
  std::vector<int> cards(n, 0);
  for (const auto& node : nodes) {
    if (node.id < 0 || node.id >= n) throw std::runtime_error("node id out of range");
    if (node.rows.empty()) throw std::runtime_error("node without rows");
    if (cards[node.id] != 0) throw std::runtime_error("duplicate node block");
    cards[node.id] = static_cast<int>(node.rows.front().size());
  }
  VarSpace space((std::vector<int>(cards)));  // validates cards >= 2

  std::vector<Cpt> cpts(n);
  for (const auto& node : nodes) {
    Cpt cpt;
    cpt.child = node.id;
    cpt.inputs = node.inputs;
    cpt.child_card = cards[node.id];
    std::uint64_t expect_rows = 1;
    for (int id : node.inputs) {
      if (id < 0 || id >= n) throw std::runtime_error("input id out of range");
      cpt.input_cards.push_back(cards[id]);
      expect_rows *= static_cast<std::uint64_t>(cards[id]);
    }
    if (node.rows.size() != expect_rows)
      throw std::runtime_error("node " + std::to_string(node.id) + ": expected " +
                               std::to_string(expect_rows) + " rows, got " +
                               std::to_string(node.rows.size()));
    cpt.row_ok.assign(expect_rows, 1);
    for (std::uint64_t y = 0; y < expect_rows; ++y) {
      const auto& row = node.rows[y];
      if (static_cast<int>(row.size()) != cpt.child_card)
        throw std::runtime_error("node " + std::to_string(node.id) + ": ragged rows");
      bool undefined = false;
      for (double e : row) undefined = undefined || std::isnan(e);
      if (undefined) {
        cpt.row_ok[y] = 0;
        cpt.entries.insert(cpt.entries.end(), row.size(), 0.0);
      } else {
        cpt.entries.insert(cpt.entries.end(), row.begin(), row.end());
      }
    }
    cpts[node.id] = std::move(cpt);
  }
  return cpts;
}

}  // namespace detail

inline void write_depnet(std::ostream& out, const DependencyNetwork& dn) {
  out << "depnet " << dn.space.size() << '\n';
  for (const auto& node : dn.nodes) detail::write_node_block(out, node, "inputs");
  out << "weights";
  for (double c : dn.weights.c) out << ' ' << fmt_g(c, 17);
  out << '\n';
}

inline DependencyNetwork read_depnet(std::istream& in) {
  detail::LineReader r(in);
  std::vector<std::string> tok;
  if (!r.next(tok)) r.fail("empty model file");
  if (tok[0] != "depnet" || tok.size() != 2) r.fail("expected 'depnet <n>' header");
  const int n = detail::parse_int(r, tok[1]);

  std::vector<std::string> pending;
  auto nodes = detail::read_node_blocks(r, n, "inputs", pending);
  if (pending.empty() || pending[0] != "weights") r.fail("expected 'weights' line");
  if (static_cast<int>(pending.size()) != 1 + n) r.fail("expected " + std::to_string(n) + " weights");
  std::vector<double> w;
  for (int k = 0; k < n; ++k) w.push_back(detail::parse_double(r, pending[1 + k]));

  DependencyNetwork dn;
  dn.nodes = detail::assemble_cpts(nodes, n);
  std::vector<int> space_cards(n);
  for (int i = 0; i < n; ++i) space_cards[i] = dn.nodes[i].child_card;
  dn.space = VarSpace(std::move(space_cards));
  dn.weights = SelectionWeights(std::move(w));
  dn.validate();
  return dn;
}

inline void write_bayesnet(std::ostream& out, const BayesianNetwork& bn) {
  out << "bayesnet " << bn.space.size() << '\n';
  for (const auto& cpt : bn.cpts) detail::write_node_block(out, cpt, "parents");
}

inline BayesianNetwork read_bayesnet(std::istream& in) {
  detail::LineReader r(in);
  std::vector<std::string> tok;
  if (!r.next(tok)) r.fail("empty model file");
  if (tok[0] != "bayesnet" || tok.size() != 2) r.fail("expected 'bayesnet <n>' header");
  const int n = detail::parse_int(r, tok[1]);

  std::vector<std::string> pending;
  auto nodes = detail::read_node_blocks(r, n, "parents", pending);
  if (!pending.empty()) r.fail("unexpected trailing line");

  BayesianNetwork bn;
  bn.cpts = detail::assemble_cpts(nodes, n);
  bn.parents.resize(n);
  std::vector<int> space_cards(n);
  for (int i = 0; i < n; ++i) {
    bn.parents[i] = bn.cpts[i].inputs;
    space_cards[i] = bn.cpts[i].child_card;
  }
  bn.space = VarSpace(std::move(space_cards));
  validate_bayesnet(bn);
  return bn;
}

// Convenience file wrappers.

template <class T, class Writer>
void save_to_file(const std::string& path, const T& value, Writer writer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  writer(out, value);
  if (!out) throw std::runtime_error("write failed: " + path);
}

template <class Reader>
auto load_from_file(const std::string& path, Reader reader) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  try {
    return reader(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

inline void save_dataset(const std::string& path, const Dataset& d) {
  save_to_file(path, d, [](std::ostream& o, const Dataset& v) { write_dataset(o, v); });
}
inline Dataset load_dataset(const std::string& path) {
  return load_from_file(path, [](std::istream& i) { return read_dataset(i); });
}
inline void save_joint(const std::string& path, const JointTable& p) {
  save_to_file(path, p, [](std::ostream& o, const JointTable& v) { write_joint(o, v); });
}
inline JointTable load_joint(const std::string& path) {
  return load_from_file(path, [](std::istream& i) { return read_joint(i); });
}
inline void save_depnet(const std::string& path, const DependencyNetwork& dn) {
  save_to_file(path, dn, [](std::ostream& o, const DependencyNetwork& v) { write_depnet(o, v); });
}
inline DependencyNetwork load_depnet(const std::string& path) {
  return load_from_file(path, [](std::istream& i) { return read_depnet(i); });
}
inline void save_bayesnet(const std::string& path, const BayesianNetwork& bn) {
  save_to_file(path, bn, [](std::ostream& o, const BayesianNetwork& v) { write_bayesnet(o, v); });
}
inline BayesianNetwork load_bayesnet(const std::string& path) {
  return load_from_file(path, [](std::istream& i) { return read_bayesnet(i); });
}

}  // namespace depnet
