#include "lacuna/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lacuna {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int to_int(const std::string& s, const std::string& what) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw std::invalid_argument("config: bad integer for " + what + ": '" + s + "'");
  }
  return v;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument("config: bad number for " + what + ": '" + s + "'");
  }
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(to_int(item, "list entry"));
  }
  if (out.empty()) throw std::invalid_argument("config: empty integer list");
  return out;
}

std::vector<SeminormSpec> parse_spec_list(const std::string& text) {
  std::vector<SeminormSpec> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("config: spec entries are p:eps, got '" + item + "'");
    }
    SeminormSpec s;
    s.p = to_double(trim(item.substr(0, colon)), "spec p");
    s.eps = to_double(trim(item.substr(colon + 1)), "spec eps");
    validate_spec(s);
    out.push_back(s);
  }
  if (out.empty()) throw std::invalid_argument("config: empty spec list");
  return out;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "run.q") {
    if (value == "auto") {
      cfg.q_auto = true;
    } else {
      cfg.q_auto = false;
      const int q = to_int(value, key);
      if (q < 2) throw std::invalid_argument("config: q must be >= 2 or auto");
      cfg.q = static_cast<std::uint64_t>(q);
    }
  } else if (key == "run.M") {
    cfg.M = to_int(value, key);
  } else if (key == "run.output") {
    cfg.output = value;
  } else if (key == "run.format") {
    if (value != "csv" && value != "json" && value != "both") {
      throw std::invalid_argument("config: format must be csv, json or both");
    }
    cfg.format = value;
  } else if (key == "run.mode") {
    if (value != "strict" && value != "demo") {
      throw std::invalid_argument("config: mode must be strict or demo");
    }
    cfg.mode = value;
  } else if (key == "run.threads") {
    cfg.threads = to_int(value, key);
  } else if (key == "mesh.n_theta") {
    cfg.mesh_n_theta = to_int(value, key);
  } else if (key == "mesh.n_r") {
    cfg.mesh_n_r = to_int(value, key);
  } else if (key == "series.samples") {
    cfg.series_samples = to_int(value, key);
  } else if (key == "solve.bc") {
    if (value != "dirichlet" && value != "neumann") {
      throw std::invalid_argument("config: bc must be dirichlet or neumann");
    }
    cfg.bc = value;
  } else if (key == "solve.rhs") {
    if (value != "one" && value != "auto" && value != "xy") {
      throw std::invalid_argument("config: rhs must be one, auto or xy");
    }
    cfg.rhs = value;
  } else if (key == "sweep.n_theta") {
    cfg.sweep_n_theta = parse_int_list(value);
  } else if (key == "sweep.M") {
    cfg.sweep_M = parse_int_list(value);
  } else if (key == "sweep.supersample") {
    cfg.supersample = to_int(value, key);
  } else if (key == "sweep.specs") {
    cfg.specs = parse_spec_list(value);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("config: unterminated section at line " +
                                    std::to_string(lineno));
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw std::invalid_argument("config: empty section at line " + std::to_string(lineno));
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected key = value at line " +
                                  std::to_string(lineno));
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty() || section.empty()) {
      throw std::invalid_argument("config: key outside a section at line " +
                                  std::to_string(lineno));
    }
    out.emplace_back(section + "." + key, trim(line.substr(eq + 1)));
  }
  return out;
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config: cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  for (const auto& [key, value] : parse_config_text(buf.str())) {
    apply_setting(cfg, key, value);
  }
}

}  // namespace lacuna
