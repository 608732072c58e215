#include "chainkit/json_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace chainkit {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void emit(const Json& v, int indent, int depth, std::string& out) {
  const auto pad = [&](int d) {
    if (indent >= 0) {
      out += '\n';
      out.append(static_cast<std::size_t>(indent * d), ' ');
    }
  };
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        pad(depth + 1);
        out += Json(it.key()).dump();
        out += indent >= 0 ? ": " : ":";
        emit(it.value(), indent, depth + 1, out);
      }
      pad(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line; nested structures get one element per line.
      bool flat = true;
      for (const auto& e : v) flat = flat && !e.is_structured();
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += flat && indent >= 0 ? ", " : ",";
        first = false;
        if (!flat) pad(depth + 1);
        emit(e, indent, depth + 1, out);
      }
      if (!flat) pad(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_double(d) : "\"" + format_double(d) + "\"";
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string dump_json(const Json& value, int indent) {
  std::string out;
  emit(value, indent, 0, out);
  out += '\n';
  return out;
}

Json to_json(double v) { return Json(v); }

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json to_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vector(m.row(i).transpose())));
  return a;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path);
  out << content;
  if (!out) throw InputError("write failed: " + path);
}

namespace {

Matrix matrix_from_json(const Json& rows, const char* what) {
  if (!rows.is_array() || rows.empty()) throw InputError(std::string(what) + " must be a nonempty array of rows");
  const std::size_t cols = rows[0].size();
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != cols) throw InputError(std::string(what) + " rows must have equal length");
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

}  // namespace

FiniteMetricMeasureSpace space_from_json(const Json& doc) {
  try {
    SpaceSpec spec;
    const auto& metric = doc.at("metric");
    const std::string type = metric.at("type").get<std::string>();
    if (type == "euclidean") {
      spec.metric.kind = MetricKind::Euclidean;
      spec.metric.coords = matrix_from_json(metric.at("coords"), "coords");
    } else if (type == "snowflake") {
      spec.metric.kind = MetricKind::Snowflake;
      spec.metric.coords = matrix_from_json(metric.at("coords"), "coords");
      spec.metric.beta = metric.at("beta").get<double>();
    } else if (type == "explicit") {
      spec.metric.kind = MetricKind::Explicit;
      spec.metric.matrix = matrix_from_json(metric.at("matrix"), "matrix");
    } else {
      throw InputError("unknown metric type: " + type);
    }
    if (doc.contains("measure")) {
      const auto& w = doc.at("measure");
      spec.measure.resize(w.size());
      for (std::size_t i = 0; i < w.size(); ++i) spec.measure(i) = w[i].get<double>();
    }
    if (doc.contains("verify_triangle")) spec.verify_triangle = doc.at("verify_triangle").get<bool>();
    auto space = build_space(spec);
    if (doc.contains("points") && doc.at("points").get<Index>() != space.size())
      throw InputError("\"points\" does not match the metric size");
    return space;
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed space file: ") + e.what());
  }
}

FiniteMetricMeasureSpace read_space_json(const std::string& path) {
  const std::string text = read_text_file(path);
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    throw InputError("cannot parse " + path + ": " + e.what());
  }
  return space_from_json(doc);
}

Json space_to_json(const FiniteMetricMeasureSpace& space) {
  Json doc;
  doc["points"] = space.size();
  const auto& prov = space.provenance();
  Json metric;
  switch (prov.kind) {
    case MetricKind::Euclidean:
      metric["type"] = "euclidean";
      metric["coords"] = to_json(prov.coords);
      break;
    case MetricKind::Snowflake:
      metric["type"] = "snowflake";
      metric["coords"] = to_json(prov.coords);
      metric["beta"] = prov.beta;
      break;
    default:
      metric["type"] = "explicit";
      metric["matrix"] = to_json(space.distances());
  }
  doc["metric"] = metric;
  doc["measure"] = to_json(space.measure());
  return doc;
}

namespace {

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    std::size_t start = 0;
    while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start]))) ++start;
    if (start == line.size()) continue;
    if (first && !std::isdigit(static_cast<unsigned char>(line[start])) && line[start] != '.' && line[start] != '-') {
      first = false;
      continue;
    }
    first = false;
    std::vector<std::string> fields;
    std::stringstream ss(line.substr(start));
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    rows.push_back(std::move(fields));
  }
  return rows;
}

double parse_number(const std::string& s, const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("bad number '" + s + "' in " + path);
  }
}

Index parse_id(const std::string& s, const std::string& path) {
  const double v = parse_number(s, path);
  if (v < 0 || v != std::floor(v)) throw InputError("bad vertex id '" + s + "' in " + path);
  return static_cast<Index>(v);
}

}  // namespace

GraphDirichletForm read_graph_csv(const std::string& edge_path, const std::optional<std::string>& vertex_path) {
  std::vector<WeightedEdge> edges;
  Index n = 0;
  for (const auto& row : read_csv_rows(edge_path)) {
    if (row.size() < 3 || row.size() > 4) throw InputError("edge rows need u,v,conductance[,length] in " + edge_path);
    WeightedEdge e;
    e.u = parse_id(row[0], edge_path);
    e.v = parse_id(row[1], edge_path);
    e.conductance = parse_number(row[2], edge_path);
    if (row.size() == 4) e.length = parse_number(row[3], edge_path);
    n = std::max({n, e.u + 1, e.v + 1});
    edges.push_back(e);
  }
  Vector measure;
  if (vertex_path) {
    std::vector<std::pair<Index, double>> entries;
    for (const auto& row : read_csv_rows(*vertex_path)) {
      if (row.size() != 2) throw InputError("vertex rows need id,measure in " + *vertex_path);
      entries.emplace_back(parse_id(row[0], *vertex_path), parse_number(row[1], *vertex_path));
      n = std::max(n, entries.back().first + 1);
    }
    measure = Vector::Ones(n);
    std::vector<char> seen(n, 0);
    for (const auto& [id, w] : entries) {
      if (seen[id]) throw InputError("duplicate vertex id in " + *vertex_path);
      seen[id] = 1;
      measure(id) = w;
    }
  }
  if (n == 0) throw InputError("graph file has no edges: " + edge_path);
  return GraphDirichletForm(n, std::move(edges), measure);
}

void write_graph_csv(const GraphDirichletForm& form, const std::string& edge_path,
                     const std::optional<std::string>& vertex_path) {
  std::string out = "u,v,conductance,length\n";
  for (const auto& e : form.edges())
    out += std::to_string(e.u) + "," + std::to_string(e.v) + "," + format_double(e.conductance) + "," +
           format_double(e.length) + "\n";
  write_text_file(edge_path, out);
  if (vertex_path) {
    std::string v = "id,measure\n";
    for (Index i = 0; i < form.size(); ++i) v += std::to_string(i) + "," + format_double(form.measure()(i)) + "\n";
    write_text_file(*vertex_path, v);
  }
}

std::string matrix_csv(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace chainkit
