#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "chainkit/common.hpp"
#include "chainkit/graph.hpp"
#include "chainkit/space.hpp"

namespace chainkit {

using Json = nlohmann::json;  // std::map backed, so object keys come out sorted

/// Serialises with sorted keys and every double printed with 17 significant
/// digits; non-finite doubles become the strings "inf", "-inf" and "nan".
std::string dump_json(const Json& value, int indent = 2);

Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Json to_json(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// {"points": n, "metric": {"type": ..., "coords" | "matrix" | "beta"}, "measure": [...]}.
FiniteMetricMeasureSpace read_space_json(const std::string& path);
FiniteMetricMeasureSpace space_from_json(const Json& doc);
Json space_to_json(const FiniteMetricMeasureSpace& space);

/// Edge list "u,v,conductance[,length]" plus optional "id,measure" vertex file.
/// A first line that does not start with a digit is taken as a header; '#'
/// starts a comment.
GraphDirichletForm read_graph_csv(const std::string& edge_path, const std::optional<std::string>& vertex_path = {});
void write_graph_csv(const GraphDirichletForm& form, const std::string& edge_path,
                     const std::optional<std::string>& vertex_path = {});

std::string matrix_csv(const Matrix& m);
std::string format_double(double v);

}  // namespace chainkit
