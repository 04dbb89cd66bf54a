#pragma once

// Run configuration: a small INI-style file (sections, key = value, '#' or
// ';' comments) plus command-line overrides; flags win over the file, the
// file wins over defaults. Everything is deterministic — there is no seed
// anywhere — so a stored config reproduces a run byte for byte.
//
// Recognized keys:
//   [run]    q = auto | <integer>; M; output; format = csv | json | both;
//            mode = strict | demo; threads
//   [mesh]   n_theta; n_r (0 derives n_theta / 8)
//   [series] samples
//   [solve]  bc = dirichlet | neumann; rhs = one | auto | xy
//   [sweep]  n_theta = <list>; M = <list>; supersample; specs = p:eps list

#include <cstdint>
#include <string>
#include <vector>

#include "lacuna/separation.hpp"

namespace lacuna {

struct RunConfig {
  // q_mode: auto picks q from the computed admissibility constant (strict),
  // explicit uses the given q (7 is the demonstration default)
  bool q_auto = false;
  std::uint64_t q = 7;
  int M = 2;

  int mesh_n_theta = 256;
  int mesh_n_r = 0;  // 0: derive as n_theta / 8

  std::vector<int> sweep_n_theta = {256, 512, 1024};
  std::vector<int> sweep_M = {1, 2};
  std::vector<SeminormSpec> specs = {{1.0, 0.25}, {2.0, 0.25}, {2.0, 0.5}, {4.0, 0.1}};
  int supersample = 16;

  std::string bc = "dirichlet";
  std::string rhs = "one";  // one | auto | xy
  std::string mode = "strict";
  int series_samples = 4096;
  int threads = 0;  // 0: leave the worker count alone

  std::string output = "out";
  std::string format = "csv";  // csv | json | both
};

// applies one setting by flattened key ("run.q", "sweep.n_theta", ...);
// throws std::invalid_argument for unknown keys or unparsable values
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// parses INI text into flattened key/value pairs in file order
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

// reads the file and applies every setting; throws on I/O or parse errors
void load_config_file(RunConfig& cfg, const std::string& path);

// "256,512,1024" -> ints; throws on junk
std::vector<int> parse_int_list(const std::string& text);

// "1:0.25, 2:0.5" -> seminorm specs; throws on junk
std::vector<SeminormSpec> parse_spec_list(const std::string& text);

}  // namespace lacuna
