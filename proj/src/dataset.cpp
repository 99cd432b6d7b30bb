#include "gnncl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace gnncl {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

[[noreturn]] void parse_fail(const std::filesystem::path& file,
                             std::size_t line, const std::string& what) {
  throw std::runtime_error(file.filename().string() + ":" +
                           std::to_string(line) + ": " + what);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

double parse_double(std::string_view field, const std::filesystem::path& file,
                    std::size_t line) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    parse_fail(file, line, "non-numeric field '" + std::string(field) + "'");
  return value;
}

std::uint64_t parse_uint(std::string_view field,
                         const std::filesystem::path& file, std::size_t line) {
  std::uint64_t value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    parse_fail(file, line, "expected integer, got '" + std::string(field) + "'");
  return value;
}

std::vector<std::string_view> split_on(const std::string& line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(sep, start);
    if (end == std::string::npos) {
      fields.emplace_back(line.data() + start, line.size() - start);
      return fields;
    }
    fields.emplace_back(line.data() + start, end - start);
    start = end + 1;
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

MultiRelationGraph load_graph(const std::filesystem::path& dir) {
  MultiRelationGraph g;
  std::vector<std::string> relation_names;
  {
    const std::filesystem::path meta_path = dir / "meta.json";
    json meta;
    try {
      meta = json::parse(read_file(meta_path));
    } catch (const json::parse_error& e) {
      throw std::runtime_error("meta.json: " + std::string(e.what()));
    }
    try {
      g.num_nodes = meta.at("num_nodes").get<std::size_t>();
      g.feature_dim = meta.at("feature_dim").get<std::size_t>();
      relation_names = meta.at("relations").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw std::runtime_error("meta.json: " + std::string(e.what()));
    }
  }

  {
    const std::filesystem::path path = dir / "features.csv";
    const std::vector<std::string> lines = split_lines(read_file(path));
    if (lines.size() != g.num_nodes)
      throw std::runtime_error("features.csv: expected " +
                               std::to_string(g.num_nodes) + " rows, found " +
                               std::to_string(lines.size()));
    g.features.assign(g.num_nodes * g.feature_dim, 0.0);
    std::vector<std::uint8_t> seen(g.num_nodes, 0);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::size_t lineno = i + 1;
      auto fields = split_on(lines[i], ',');
      if (fields.size() != g.feature_dim + 1)
        parse_fail(path, lineno,
                   "expected " + std::to_string(g.feature_dim + 1) +
                       " fields, got " + std::to_string(fields.size()));
      const std::uint64_t v = parse_uint(fields[0], path, lineno);
      if (v >= g.num_nodes) parse_fail(path, lineno, "node id out of range");
      if (seen[v]) parse_fail(path, lineno, "duplicate node id");
      seen[v] = 1;
      for (std::size_t c = 0; c < g.feature_dim; ++c)
        g.features[v * g.feature_dim + c] =
            parse_double(fields[c + 1], path, lineno);
    }
  }

  {
    const std::filesystem::path path = dir / "labels.csv";
    const std::vector<std::string> lines = split_lines(read_file(path));
    if (lines.size() != g.num_nodes)
      throw std::runtime_error("labels.csv: expected " +
                               std::to_string(g.num_nodes) + " rows, found " +
                               std::to_string(lines.size()));
    g.labels.assign(g.num_nodes, 0);
    std::vector<std::uint8_t> seen(g.num_nodes, 0);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::size_t lineno = i + 1;
      auto fields = split_on(lines[i], ',');
      if (fields.size() != 2) parse_fail(path, lineno, "expected 2 fields");
      const std::uint64_t v = parse_uint(fields[0], path, lineno);
      if (v >= g.num_nodes) parse_fail(path, lineno, "node id out of range");
      if (seen[v]) parse_fail(path, lineno, "duplicate node id");
      seen[v] = 1;
      const std::uint64_t y = parse_uint(fields[1], path, lineno);
      if (y > 1) parse_fail(path, lineno, "label outside {0,1}");
      g.labels[v] = static_cast<std::uint8_t>(y);
    }
  }

  for (const std::string& name : relation_names) {
    const std::filesystem::path path = dir / ("rel_" + name + ".edges");
    const std::vector<std::string> lines = split_lines(read_file(path));
    Relation rel;
    rel.name = name;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::size_t lineno = i + 1;
      if (lines[i].empty()) continue;
      auto fields = split_on(lines[i], '\t');
      if (fields.size() != 2)
        parse_fail(path, lineno, "expected 'u<TAB>v'");
      const std::uint64_t u = parse_uint(fields[0], path, lineno);
      const std::uint64_t v = parse_uint(fields[1], path, lineno);
      if (u >= g.num_nodes || v >= g.num_nodes)
        parse_fail(path, lineno, "endpoint out of range");
      if (u == v) parse_fail(path, lineno, "self-loop edge");
      rel.edges.emplace_back(static_cast<std::uint32_t>(u),
                             static_cast<std::uint32_t>(v));
    }
    canonicalize_edges(rel.edges);
    g.relations.push_back(std::move(rel));
  }

  g.validate();
  return g;
}

void save_graph(const MultiRelationGraph& g, const std::filesystem::path& dir) {
  g.validate();
  std::filesystem::create_directories(dir);
  const auto open = [&](const std::string& name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };

  {
    json meta;
    meta["num_nodes"] = g.num_nodes;
    meta["feature_dim"] = g.feature_dim;
    json names = json::array();
    for (const Relation& rel : g.relations) names.push_back(rel.name);
    meta["relations"] = names;
    std::ofstream out = open("meta.json");
    out << meta.dump(2) << "\n";
  }
  {
    std::ofstream out = open("features.csv");
    for (std::size_t v = 0; v < g.num_nodes; ++v) {
      out << v;
      for (std::size_t c = 0; c < g.feature_dim; ++c)
        out << ',' << format_double(g.features[v * g.feature_dim + c]);
      out << '\n';
    }
  }
  {
    std::ofstream out = open("labels.csv");
    for (std::size_t v = 0; v < g.num_nodes; ++v)
      out << v << ',' << static_cast<int>(g.labels[v]) << '\n';
  }
  for (const Relation& rel : g.relations) {
    std::ofstream out = open("rel_" + rel.name + ".edges");
    for (const Edge& e : rel.edges) out << e.first << '\t' << e.second << '\n';
  }
}

std::uint64_t fingerprint_dataset(const std::filesystem::path& dir) {
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name == "meta.json" || name == "features.csv" || name == "labels.csv" ||
        (name.starts_with("rel_") && name.ends_with(".edges")))
      names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&](const std::string& bytes) {
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0;
    h *= 1099511628211ULL;
  };
  for (const std::string& name : names) {
    mix(name);
    mix(read_file(dir / name));
  }
  return h;
}

}  // namespace gnncl
