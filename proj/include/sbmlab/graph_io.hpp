#pragma once

#include <iosfwd>
#include <string>

#include "sbmlab/model.hpp"

namespace sbmlab {

/// Text form of a GraphSample, round-trip exact:
///   line 1:            n q model_tag seed
///   lines 2 .. n+1:    v label        (label -1 when the vertex is unassigned)
///   remaining lines:   u v            (canonical edge list, u < v, sorted)
void save_graph(const GraphSample& g, std::ostream& out);
void save_graph_file(const GraphSample& g, const std::string& path);

/// Parse the format written by save_graph. Throws SchemaMismatch on any
/// malformed content and IoError when the stream/file cannot be read. A
/// labeling that is -1 on every vertex loads back as the empty sentinel.
GraphSample load_graph(std::istream& in);
GraphSample load_graph_file(const std::string& path);

}  // namespace sbmlab
