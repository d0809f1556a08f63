#include "phasetop/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace phasetop {

ConfigError::ConfigError(const std::string& k, int l, const std::string& message)
    : ValidationError((l > 0 ? "line " + std::to_string(l) + ": " : std::string()) + "'" + k +
                      "': " + message),
      key(k),
      line(l) {}

RunConfig::RunConfig() {
  optimizer.delta = 0.05;
  optimizer.gamma_schedule = {10.0, 100.0, 1000.0};
  optimizer.tau0 = 0.05;
  optimizer.forward = forward;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string formatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double toDouble(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, 0, "expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key, 0, "expected a number, got '" + v + "'");
  if (!std::isfinite(out)) throw ConfigError(key, 0, "must be finite");
  return out;
}

long toInteger(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long out = 0;
  try {
    out = std::stol(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, 0, "expected an integer, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key, 0, "expected an integer, got '" + v + "'");
  return out;
}

std::vector<double> toList(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(toDouble(key, trim(item)));
  if (out.empty()) throw ConfigError(key, 0, "expected a comma-separated list");
  return out;
}

std::string formatList(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + formatDouble(v[i]);
  return s;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, 0, what);
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

Key real(std::string section, std::string name, std::function<double&(RunConfig&)> ref,
         std::function<bool(double)> ok, std::string what) {
  Key k{section, name, nullptr, nullptr};
  k.set = [=](RunConfig& c, const std::string& v) {
    const double x = toDouble(name, v);
    require(ok(x), name, what);
    ref(c) = x;
  };
  k.get = [=](const RunConfig& c) { return formatDouble(ref(const_cast<RunConfig&>(c))); };
  return k;
}

template <class Int>
Key integer(std::string section, std::string name, std::function<Int&(RunConfig&)> ref,
            long min_value) {
  Key k{section, name, nullptr, nullptr};
  k.set = [=](RunConfig& c, const std::string& v) {
    const long x = toInteger(name, v);
    require(x >= min_value, name, "must be at least " + std::to_string(min_value));
    ref(c) = static_cast<Int>(x);
  };
  k.get = [=](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); };
  return k;
}

Key list(std::string section, std::string name,
         std::function<std::vector<double>&(RunConfig&)> ref) {
  Key k{section, name, nullptr, nullptr};
  k.set = [=](RunConfig& c, const std::string& v) {
    const auto x = toList(name, v);
    for (double e : x) require(e > 0.0, name, "entries must be positive");
    ref(c) = x;
  };
  k.get = [=](const RunConfig& c) { return formatList(ref(const_cast<RunConfig&>(c))); };
  return k;
}

const auto positive = [](double x) { return x > 0.0; };
const auto nonnegative = [](double x) { return x >= 0.0; };
const auto anything = [](double) { return true; };

const std::vector<Key>& keyTable() {
  static const std::vector<Key> table = [] {
    std::vector<Key> t;
    // [mesh]
    Key file{"mesh", "file", nullptr, nullptr};
    file.set = [](RunConfig& c, const std::string& v) { c.mesh_file = v; };
    file.get = [](const RunConfig& c) { return c.mesh_file; };
    t.push_back(file);
    t.push_back(integer<int>("mesh", "nx", [](RunConfig& c) -> int& { return c.nx; }, 1));
    t.push_back(integer<int>("mesh", "ny", [](RunConfig& c) -> int& { return c.ny; }, 1));
    t.push_back(real("mesh", "lx", [](RunConfig& c) -> double& { return c.lx; }, positive,
                     "must be positive"));
    t.push_back(real("mesh", "ly", [](RunConfig& c) -> double& { return c.ly; }, positive,
                     "must be positive"));
    Key split{"mesh", "split", nullptr, nullptr};
    split.set = [](RunConfig& c, const std::string& v) {
      if (v == "diagonal") c.split = Split::Diagonal;
      else if (v == "crossed") c.split = Split::Crossed;
      else throw ConfigError("split", 0, "expected 'diagonal' or 'crossed'");
    };
    split.get = [](const RunConfig& c) {
      return std::string(c.split == Split::Diagonal ? "diagonal" : "crossed");
    };
    t.push_back(split);
    t.push_back(real("mesh", "window", [](RunConfig& c) -> double& { return c.window; },
                     [](double x) { return x > 0.0 && x <= 1.0; }, "must lie in (0, 1]"));

    // [material]
    auto law = [&](const char* name, double MaterialLaws::*field, bool strict) {
      t.push_back(real("material", name,
                       [field](RunConfig& c) -> double& { return c.laws.*field; },
                       strict ? std::function<bool(double)>(positive)
                              : std::function<bool(double)>(nonnegative),
                       strict ? "must be positive" : "must be nonnegative"));
    };
    law("mu0", &MaterialLaws::mu0, true);
    law("mu1", &MaterialLaws::mu1, false);
    law("lambda0", &MaterialLaws::lambda0, true);
    law("lambda1", &MaterialLaws::lambda1, false);
    law("h0", &MaterialLaws::h0, true);
    law("h1", &MaterialLaws::h1, false);
    law("d0", &MaterialLaws::d0, true);
    law("d1", &MaterialLaws::d1, false);

    // [loads]
    auto component = [&](const char* name, Vec2 RunConfig::*vec, int i) {
      t.push_back(real("loads", name, [vec, i](RunConfig& c) -> double& { return (c.*vec)[i]; },
                       anything, ""));
    };
    component("fx", &RunConfig::body_force, 0);
    component("fy", &RunConfig::body_force, 1);
    component("gx", &RunConfig::traction, 0);
    component("gy", &RunConfig::traction, 1);
    component("wx", &RunConfig::dirichlet, 0);
    component("wy", &RunConfig::dirichlet, 1);

    // [solver]
    t.push_back(real("solver", "gamma", [](RunConfig& c) -> double& { return c.gamma; },
                     positive, "must be positive"));
    t.push_back(real("solver", "newton_tol",
                     [](RunConfig& c) -> double& { return c.forward.tol; }, positive,
                     "must be positive"));
    t.push_back(integer<int>("solver", "newton_max_iterations",
                             [](RunConfig& c) -> int& { return c.forward.max_iterations; }, 1));
    t.push_back(real("solver", "linear_tol",
                     [](RunConfig& c) -> double& { return c.forward.linear_tol; }, positive,
                     "must be positive"));
    t.push_back(integer<std::uint64_t>(
        "solver", "seed", [](RunConfig& c) -> std::uint64_t& { return c.seed; }, 0));
    t.push_back(integer<long>("solver", "samples", [](RunConfig& c) -> long& { return c.samples; },
                              1));
    t.push_back(integer<int>("solver", "fd_directions",
                             [](RunConfig& c) -> int& { return c.fd_directions; }, 1));
    t.push_back(real("solver", "fd_step", [](RunConfig& c) -> double& { return c.fd_step; },
                     positive, "must be positive"));

    // [optimizer]
    t.push_back(real("optimizer", "delta",
                     [](RunConfig& c) -> double& { return c.optimizer.delta; }, positive,
                     "must be positive"));
    t.push_back(list("optimizer", "gamma_schedule",
                     [](RunConfig& c) -> std::vector<double>& {
                       return c.optimizer.gamma_schedule;
                     }));
    t.push_back(real("optimizer", "tau0", [](RunConfig& c) -> double& { return c.optimizer.tau0; },
                     positive, "must be positive"));
    t.push_back(integer<int>("optimizer", "max_iterations",
                             [](RunConfig& c) -> int& { return c.optimizer.max_iterations; }, 0));
    t.push_back(real("optimizer", "grad_tol",
                     [](RunConfig& c) -> double& { return c.optimizer.grad_tol; }, positive,
                     "must be positive"));
    t.push_back(real("optimizer", "grad_atol",
                     [](RunConfig& c) -> double& { return c.optimizer.grad_atol; }, nonnegative,
                     "must be nonnegative"));
    t.push_back(real("optimizer", "shrink",
                     [](RunConfig& c) -> double& { return c.optimizer.shrink; },
                     [](double x) { return x > 0.0 && x < 1.0; }, "must lie in (0, 1)"));
    t.push_back(real("optimizer", "grow", [](RunConfig& c) -> double& { return c.optimizer.grow; },
                     [](double x) { return x >= 1.0; }, "must be at least 1"));
    t.push_back(real("optimizer", "volume_penalty",
                     [](RunConfig& c) -> double& { return c.optimizer.volume_penalty; },
                     nonnegative, "must be nonnegative"));
    t.push_back(real("optimizer", "z0", [](RunConfig& c) -> double& { return c.z0; }, anything,
                     ""));
    t.push_back(list("optimizer", "delta_sweep",
                     [](RunConfig& c) -> std::vector<double>& { return c.delta_sweep; }));
    t.push_back(real("optimizer", "profile_delta",
                     [](RunConfig& c) -> double& { return c.profile_delta; },
                     [](double x) { return x > 0.0 && x < 0.5; }, "must lie in (0, 0.5)"));
    t.push_back(real("optimizer", "profile_h_ratio",
                     [](RunConfig& c) -> double& { return c.profile_h_ratio; },
                     [](double x) { return x > 0.0 && x <= 1.0; }, "must lie in (0, 1]"));
    return t;
  }();
  return table;
}

const Key* findKey(const std::string& name) {
  for (const auto& k : keyTable())
    if (k.name == name) return &k;
  return nullptr;
}

std::size_t editDistance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

const std::vector<std::string> kSections = {"mesh", "material", "loads", "solver", "optimizer"};

}  // namespace

std::string suggestKey(const std::string& unknown) {
  std::string best;
  std::size_t best_d = 4;
  for (const auto& k : keyTable()) {
    const std::size_t d = editDistance(unknown, k.name);
    if (d < best_d) {
      best_d = d;
      best = k.name;
    }
  }
  return best;
}

RunConfig parseConfig(const std::string& text) {
  RunConfig c;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError(s, line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (std::find(kSections.begin(), kSections.end(), section) == kSections.end())
        throw ConfigError(section, line, "unknown section");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(s, line, "expected 'key = value'");
    const std::string name = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const Key* key = findKey(name);
    if (!key) {
      const std::string hint = suggestKey(name);
      throw ConfigError(name, line,
                        "unknown key" + (hint.empty() ? "" : "; did you mean '" + hint + "'?"));
    }
    if (section.empty())
      throw ConfigError(name, line, "key outside a section; expected [" + key->section + "]");
    if (section != key->section)
      throw ConfigError(name, line, "belongs to section [" + key->section + "]");
    if (seen.count(name))
      throw ConfigError(name, line,
                        "duplicate key (first set on line " + std::to_string(seen[name]) + ")");
    seen[name] = line;
    if (value.empty()) throw ConfigError(name, line, "missing value");
    try {
      key->set(c, value);
    } catch (const ConfigError& e) {
      throw ConfigError(e.key, line, std::string(e.what()).substr(e.key.size() + 4));
    }
  }

  auto lineOf = [&](const std::string& k) {
    const auto it = seen.find(k);
    return it == seen.end() ? 0 : it->second;
  };
  try {
    c.laws.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const std::string field = msg.substr(0, msg.find(' '));
    throw ConfigError(field, lineOf(field), msg.substr(field.size() + 1));
  }
  c.optimizer.forward = c.forward;
  try {
    c.optimizer.validate();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    std::string field = msg.substr(0, msg.find(':'));
    if (field == "gamma") field = "gamma_schedule";
    throw ConfigError(field, lineOf(field), msg.substr(msg.find(':') + 2));
  }
  for (std::size_t i = 1; i < c.delta_sweep.size(); ++i)
    if (!(c.delta_sweep[i] < c.delta_sweep[i - 1]))
      throw ConfigError("delta_sweep", lineOf("delta_sweep"), "must be strictly decreasing");
  return c;
}

RunConfig loadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig c = parseConfig(buf.str());
  if (!c.mesh_file.empty()) {
    std::filesystem::path mesh(c.mesh_file);
    if (mesh.is_relative()) mesh = std::filesystem::path(path).parent_path() / mesh;
    if (!std::filesystem::exists(mesh))
      throw ConfigError("file", 0, "mesh file '" + mesh.string() + "' does not exist");
    c.mesh_file = mesh.string();
  }
  return c;
}

std::string formatConfig(const RunConfig& config) {
  std::string out;
  for (const auto& section : kSections) {
    out += "[" + section + "]\n";
    for (const auto& k : keyTable()) {
      if (k.section != section) continue;
      const std::string v = k.get(config);
      if (v.empty()) continue;  // unset optional string
      out += k.name + " = " + v + "\n";
    }
  }
  return out;
}

Problem buildProblem(const RunConfig& config) {
  if (config.mesh_file.empty()) {
    CantileverSpec spec;
    spec.nx = config.nx;
    spec.ny = config.ny;
    spec.lx = config.lx;
    spec.ly = config.ly;
    spec.window = config.window;
    spec.split = config.split;
    return rectangleProblem(spec, config.body_force, config.traction, config.dirichlet);
  }
  Problem p;
  p.mesh = loadMesh(config.mesh_file);
  p.loads = LoadCase::uniform(p.mesh, config.body_force, config.traction, config.dirichlet);
  return p;
}

}  // namespace phasetop
