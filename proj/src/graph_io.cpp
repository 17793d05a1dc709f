#include "sbmlab/graph_io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "sbmlab/errors.hpp"

namespace sbmlab {

void save_graph(const GraphSample& g, std::ostream& out) {
  out << g.n << ' ' << g.q << ' ' << (g.model_tag.empty() ? "manual" : g.model_tag) << ' '
      << g.seed << '\n';
  for (int64_t v = 0; v < g.n; ++v) {
    const int32_t label = g.truth.assignment.empty() ? Labeling::kUnassigned
                                                     : g.truth[static_cast<size_t>(v)];
    out << v << ' ' << label << '\n';
  }
  for (const auto& e : g.edges) out << e.first << ' ' << e.second << '\n';
  if (!out) throw IoError("save_graph: write failed");
}

void save_graph_file(const GraphSample& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_graph: cannot open " + path);
  save_graph(g, out);
}

GraphSample load_graph(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaMismatch("load_graph: missing header line");
  GraphSample g;
  {
    std::istringstream hdr(line);
    std::string extra;
    if (!(hdr >> g.n >> g.q >> g.model_tag >> g.seed) || (hdr >> extra))
      throw SchemaMismatch("load_graph: header must be `n q model seed`");
  }
  if (g.n < 0 || g.q < 0) throw SchemaMismatch("load_graph: negative n or q");

  Labeling labels(static_cast<size_t>(g.n));
  bool any_assigned = false;
  for (int64_t i = 0; i < g.n; ++i) {
    if (!std::getline(in, line))
      throw SchemaMismatch("load_graph: fewer vertex lines than the header's n");
    std::istringstream row(line);
    int64_t v = 0;
    int32_t label = 0;
    std::string extra;
    if (!(row >> v >> label) || (row >> extra))
      throw SchemaMismatch("load_graph: vertex line must be `v label`");
    if (v != i) throw SchemaMismatch("load_graph: vertex lines must list 0..n-1 in order");
    if (label != Labeling::kUnassigned && (label < 0 || label >= g.q))
      throw SchemaMismatch("load_graph: label outside [0, q)");
    labels[static_cast<size_t>(i)] = label;
    any_assigned = any_assigned || label != Labeling::kUnassigned;
  }
  if (any_assigned) g.truth = std::move(labels);

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    int64_t u = 0, v = 0;
    std::string extra;
    if (!(row >> u >> v) || (row >> extra))
      throw SchemaMismatch("load_graph: edge line must be `u v`");
    if (u < 0 || v < 0 || u >= g.n || v >= g.n)
      throw SchemaMismatch("load_graph: edge endpoint outside [0, n)");
    g.edges.emplace_back(static_cast<int32_t>(u), static_cast<int32_t>(v));
  }
  g.finalize();
  return g;
}

GraphSample load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_graph: cannot open " + path);
  return load_graph(in);
}

}  // namespace sbmlab
