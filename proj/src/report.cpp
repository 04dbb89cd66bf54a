#include "lacuna/report.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <stdexcept>

#include <json.hpp>

namespace lacuna {

std::string fmt17(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[80];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  const auto dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  const auto tmp = path.string() + ".tmp";
  {
    std::FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw std::runtime_error("write_atomic: cannot open " + tmp);
    const std::size_t n = std::fwrite(content.data(), 1, content.size(), f);
    const int rc = std::fclose(f);
    if (n != content.size() || rc != 0) {
      std::remove(tmp.c_str());
      throw std::runtime_error("write_atomic: short write to " + tmp);
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string CsvTable::render(const std::string& timestamp) const {
  std::string out = "# " + schema + " generated=" + timestamp + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ',';
    out += columns[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

std::string sweep_csv(const BlowupReport& rep, const std::string& timestamp) {
  CsvTable t;
  t.schema = "lacuna-sweep-v1";
  t.columns = {"n_theta",
               "M",
               "n_r",
               "control",
               "p",
               "eps",
               "flux_seminorm",
               "flux_growth",
               "grad_order",
               "grad_seminorm",
               "flux_total",
               "green_dirichlet_rel",
               "conservation_rel",
               "green_neumann_lhs",
               "green_neumann_rhs",
               "green_neumann_rel",
               "trace_max_residual",
               "trace_growth_constant",
               "trace_a_seminorm",
               "trace_b_seminorm",
               "under_resolved",
               "error"};

  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    std::size_t grad_at = 0;  // running index into the admissible subset
    for (std::size_t s = 0; s < rep.plan.specs.size(); ++s) {
      const auto& spec = rep.plan.specs[s];
      const bool adm = grad_order_admissible(spec);
      std::vector<std::string> row;
      row.push_back(std::to_string(r.n_theta));
      row.push_back(std::to_string(r.M));
      row.push_back(std::to_string(r.n_r));
      row.push_back(r.control ? "1" : "0");
      row.push_back(fmt17(spec.p));
      row.push_back(fmt17(spec.eps));
      if (r.error.empty()) {
        row.push_back(fmt17(r.flux_semi[s]));
        row.push_back(i < rep.flux_growth.size() && !rep.flux_growth[i].empty()
                          ? fmt17(rep.flux_growth[i][s])
                          : "");
        if (adm) {
          row.push_back(fmt17(1.0 / spec.p + spec.eps));
          row.push_back(fmt17(r.grad_semi[grad_at]));
        } else {
          row.push_back("");
          row.push_back("");
        }
        row.push_back(fmt17(r.flux_total));
        row.push_back(fmt17(r.green_dirichlet_rel));
        row.push_back(fmt17(r.conservation_rel));
        row.push_back(fmt17(r.green_neumann_lhs));
        row.push_back(fmt17(r.green_neumann_rhs));
        row.push_back(fmt17(r.green_neumann_rel));
        row.push_back(fmt17(r.trace_max_residual));
        row.push_back(fmt17(r.trace_growth_constant));
        row.push_back(fmt17(r.trace_a_seminorm));
        row.push_back(fmt17(r.trace_b_seminorm));
        row.push_back(r.flux_under_resolved ? "1" : "0");
        row.push_back("");
      } else {
        // flux_seminorm through under_resolved stay empty
        for (int k = 0; k < 15; ++k) row.push_back("");
        row.push_back(csv_field(r.error));
      }
      if (adm) ++grad_at;
      t.rows.push_back(std::move(row));
    }
  }
  return t.render(timestamp);
}

std::string sweep_json(const BlowupReport& rep, const std::string& timestamp) {
  using json = nlohmann::ordered_json;
  json j;
  j["schema"] = "lacuna-sweep-v1";
  j["generated"] = timestamp;

  json plan;
  plan["q"] = rep.plan.base.q;
  plan["modulus"] = rep.plan.base.N;
  plan["flux_supersample"] = rep.plan.flux_supersample;
  plan["include_control"] = rep.plan.include_control;
  plan["cases"] = json::array();
  for (const auto& c : rep.plan.cases) {
    plan["cases"].push_back({{"M", c.M}, {"n_theta", c.n_theta}, {"n_r", c.n_r}});
  }
  plan["specs"] = json::array();
  for (const auto& s : rep.plan.specs) {
    plan["specs"].push_back({{"p", s.p}, {"eps", s.eps}});
  }
  j["plan"] = std::move(plan);

  j["grad_specs"] = nlohmann::ordered_json::array();
  for (const auto& s : rep.grad_specs) {
    j["grad_specs"].push_back({{"p", s.p}, {"eps", s.eps}, {"s", 1.0 / s.p + s.eps}});
  }
  j["headline_spec"] = rep.headline_spec;

  j["rows"] = json::array();
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    json row;
    row["n_theta"] = r.n_theta;
    row["M"] = r.M;
    row["n_r"] = r.n_r;
    row["control"] = r.control;
    if (!r.error.empty()) {
      row["error"] = r.error;
      j["rows"].push_back(std::move(row));
      continue;
    }
    row["area_polygon"] = r.area_polygon;
    row["area_smooth"] = r.area_smooth;
    row["dirichlet_residual"] = r.dirichlet_residual;
    row["neumann_residual"] = r.neumann_residual;
    row["flux_total"] = r.flux_total;
    row["green_dirichlet_rel"] = r.green_dirichlet_rel;
    row["conservation_rel"] = r.conservation_rel;
    row["green_neumann_lhs"] = r.green_neumann_lhs;
    row["green_neumann_rhs"] = r.green_neumann_rhs;
    row["green_neumann_rel"] = r.green_neumann_rel;
    row["flux_seminorm"] = r.flux_semi;
    row["flux_under_resolved"] = r.flux_under_resolved;
    row["grad_seminorm"] = r.grad_semi;
    if (i < rep.flux_growth.size()) row["flux_growth"] = rep.flux_growth[i];
    row["trace_max_residual"] = r.trace_max_residual;
    row["trace_growth_constant"] = r.trace_growth_constant;
    row["trace_a_seminorm"] = r.trace_a_seminorm;
    row["trace_b_seminorm"] = r.trace_b_seminorm;
    j["rows"].push_back(std::move(row));
  }

  j["invariants"] = {{"control_flat", rep.invariants.control_flat},
                     {"flux_growth_strict", rep.invariants.flux_growth_strict},
                     {"nonvanishing_flux", rep.invariants.nonvanishing_flux},
                     {"green_dirichlet_5pct", rep.invariants.green_dirichlet_5pct},
                     {"all_pass", rep.invariants.all_pass()}};

  return j.dump(2) + "\n";
}

}  // namespace lacuna
