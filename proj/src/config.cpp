// Copyright 2026 The xtfc-hjb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xtfc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace xtfc {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && s[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

std::string fmt_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s = ec == std::errc() ? std::string(buf, ptr) : "nan";
  // Keep a decimal point so the value reads back as a float.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string fmt_vec(const Vec& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt_double(v[i]);
  }
  return s + "]";
}

Vec flatten(const Mat& m) {
  Vec v(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) v[i * m.cols() + j] = m(i, j);
  }
  return v;
}

// Reads a typed document; every accessor marks its key as consumed so that
// leftovers can be reported as unknown.
class Reader {
 public:
  explicit Reader(const ConfigDocument& doc) : doc_(doc) {}

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(doc_.source, line, msg);
  }

  bool has_section(const std::string& s) const {
    return doc_.sections.count(s) != 0;
  }
  int section_line(const std::string& s) const {
    const auto it = doc_.section_lines.find(s);
    return it == doc_.section_lines.end() ? 0 : it->second;
  }

  const ConfigEntry* find(const std::string& section, const std::string& key) {
    const auto s = doc_.sections.find(section);
    if (s == doc_.sections.end()) return nullptr;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    used_.insert(section + "." + key);
    return &k->second;
  }

  std::optional<double> number(const std::string& section, const std::string& key) {
    const ConfigEntry* e = find(section, key);
    if (!e) return std::nullopt;
    if (const auto* d = std::get_if<double>(&e->value)) return *d;
    fail(e->line, "[" + section + "] " + key + " must be a number");
  }

  std::optional<long long> integer(const std::string& section, const std::string& key) {
    const ConfigEntry* e = find(section, key);
    if (!e) return std::nullopt;
    long long v = 0;
    const auto [ptr, ec] =
        std::from_chars(e->raw.data(), e->raw.data() + e->raw.size(), v);
    if (ec != std::errc() || ptr != e->raw.data() + e->raw.size()) {
      fail(e->line, "[" + section + "] " + key + " must be an integer");
    }
    return v;
  }

  std::optional<std::uint64_t> unsigned_integer(const std::string& section,
                                                const std::string& key) {
    const ConfigEntry* e = find(section, key);
    if (!e) return std::nullopt;
    std::uint64_t v = 0;
    const auto [ptr, ec] =
        std::from_chars(e->raw.data(), e->raw.data() + e->raw.size(), v);
    if (ec != std::errc() || ptr != e->raw.data() + e->raw.size()) {
      fail(e->line, "[" + section + "] " + key + " must be a non-negative integer");
    }
    return v;
  }

  std::optional<std::string> text(const std::string& section, const std::string& key) {
    const ConfigEntry* e = find(section, key);
    if (!e) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&e->value)) return *s;
    fail(e->line, "[" + section + "] " + key + " must be a string");
  }

  std::optional<Vec> vector(const std::string& section, const std::string& key) {
    const ConfigEntry* e = find(section, key);
    if (!e) return std::nullopt;
    if (const auto* a = std::get_if<std::vector<double>>(&e->value)) {
      return Eigen::Map<const Vec>(a->data(), static_cast<Eigen::Index>(a->size()));
    }
    if (const auto* d = std::get_if<double>(&e->value)) return Vec::Constant(1, *d);
    fail(e->line, "[" + section + "] " + key + " must be an array of numbers");
  }

  int line_of(const std::string& section, const std::string& key) const {
    const auto s = doc_.sections.find(section);
    if (s == doc_.sections.end()) return section_line(section);
    const auto k = s->second.find(key);
    return k == s->second.end() ? section_line(section) : k->second.line;
  }

  void reject_unused() const {
    for (const auto& [section, entries] : doc_.sections) {
      for (const auto& [key, entry] : entries) {
        if (!used_.count(section + "." + key)) {
          fail(entry.line, "unknown key '" + key + "' in [" + section + "]");
        }
      }
    }
  }

 private:
  const ConfigDocument& doc_;
  std::set<std::string> used_;
};

// n entries -> diagonal matrix, n*n entries -> full matrix (row-major).
Mat square_from(const Vec& v, Eigen::Index n, Reader& reader, int line,
                const std::string& key) {
  if (v.size() == n) return v.asDiagonal();
  if (v.size() == n * n) {
    Mat m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = v[i * n + j];
    }
    return m;
  }
  reader.fail(line, "[problem] " + key + " needs " + std::to_string(n) +
                        " (diagonal) or " + std::to_string(n * n) +
                        " (row-major) entries");
}

void read_problem(Reader& r, ProblemConfig& p) {
  const auto name = r.text("problem", "name");
  if (!name) r.fail(r.section_line("problem"), "[problem] is missing required key 'name'");
  p.name = *name;
  const auto names = registered_problems();
  if (std::find(names.begin(), names.end(), p.name) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    r.fail(r.line_of("problem", "name"),
           "unknown problem '" + p.name + "' (expected one of: " + list + ")");
  }

  const bool pendulum = p.name == "pendulum";
  const bool detumbling = p.name == "detumbling";
  auto only_for = [&](const std::string& key, bool ok, const char* which) {
    if (!ok) {
      r.fail(r.line_of("problem", key),
             "[problem] " + key + " applies only to problem " + which);
    }
  };

  for (const char* key : {"mass", "length", "inertia_com", "gravity", "torque_limit"}) {
    if (const auto v = r.number("problem", key)) {
      only_for(key, pendulum, "pendulum");
      const std::string k = key;
      if (k == "mass") p.pendulum.mass = *v;
      if (k == "length") p.pendulum.length = *v;
      if (k == "inertia_com") p.pendulum.inertia_com = *v;
      if (k == "gravity") p.pendulum.gravity = *v;
      if (k == "torque_limit") p.pendulum.torque_limit = *v;
    }
  }
  if (const auto v = r.vector("problem", "inertia")) {
    only_for("inertia", detumbling, "detumbling");
    p.detumbling.inertia = square_from(*v, 3, r, r.line_of("problem", "inertia"), "inertia");
  }
  if (const auto v = r.vector("problem", "q")) {
    only_for("q", pendulum || detumbling, "pendulum or detumbling");
    const int line = r.line_of("problem", "q");
    if (pendulum) p.pendulum.q = square_from(*v, 2, r, line, "q");
    if (detumbling) p.detumbling.q = square_from(*v, 3, r, line, "q");
  }
  if (const auto v = r.vector("problem", "r")) {
    only_for("r", pendulum || detumbling, "pendulum or detumbling");
    const int line = r.line_of("problem", "r");
    if (pendulum) {
      if (v->size() != 1) r.fail(line, "[problem] r must be a scalar for pendulum");
      p.pendulum.r_weight = (*v)[0];
    }
    if (detumbling) p.detumbling.r = square_from(*v, 3, r, line, "r");
  }
  p.domain_lower = r.vector("problem", "domain_lower");
  p.domain_upper = r.vector("problem", "domain_upper");
  p.u_min = r.vector("problem", "u_min");
  p.u_max = r.vector("problem", "u_max");
}

void read_train(Reader& r, TrainConfig& t) {
  auto positive_int = [&](const char* section, const char* key, int& out) {
    if (const auto v = r.integer(section, key)) {
      if (*v < 0 || *v > std::numeric_limits<int>::max()) {
        r.fail(r.line_of(section, key), std::string("[") + section + "] " + key +
                                            " is out of range");
      }
      out = static_cast<int>(*v);
    }
  };
  auto num = [&](const char* section, const char* key, double& out) {
    if (const auto v = r.number(section, key)) out = *v;
  };
  auto parse_enum = [&](const char* key, auto parser, auto& out) {
    if (const auto v = r.text("train", key)) {
      try {
        out = parser(*v);
      } catch (const InvalidArgument& e) {
        r.fail(r.line_of("train", key), e.what());
      }
    }
  };

  positive_int("network", "hidden", t.hidden);
  num("network", "weight_scale", t.weight_scale);
  if (const auto a = r.text("network", "activation")) {
    if (*a != "swish") {
      r.fail(r.line_of("network", "activation"),
             "unknown activation '" + *a + "' (only swish is available)");
    }
  }

  positive_int("train", "num_points", t.num_points);
  parse_enum("sampling", parse_sampling, t.sampling);
  if (const auto v = r.unsigned_integer("train", "seed")) t.seed = *v;
  parse_enum("init_mode", parse_init_mode, t.init_mode);
  num("train", "ridge", t.ridge);
  num("train", "lambda", t.lambda);
  num("train", "adam_lr", t.adam_lr);
  positive_int("train", "adam_epochs", t.adam_epochs);
  if (const auto v = r.text("train", "scheduler")) {
    if (*v == "plateau_halving") {
      t.scheduler.enabled = true;
    } else if (*v == "none") {
      t.scheduler.enabled = false;
    } else {
      r.fail(r.line_of("train", "scheduler"),
             "unknown scheduler '" + *v + "' (expected plateau_halving or none)");
    }
  }
  positive_int("train", "patience", t.scheduler.patience);
  num("train", "factor", t.scheduler.factor);
  num("train", "clip_norm", t.clip_norm);
  positive_int("train", "lbfgs_iters", t.lbfgs_iters);
  positive_int("train", "lbfgs_memory", t.lbfgs_memory);
  parse_enum("policy_mode", parse_policy_mode, t.policy_mode);
  positive_int("train", "threads", t.threads);
}

void read_sim(Reader& r, RunConfig& c) {
  if (const auto v = r.number("sim", "dt")) c.sim.dt = *v;
  if (const auto v = r.number("sim", "t_max")) c.sim.t_max = *v;
  if (const auto v = r.number("sim", "stop_tol")) c.sim.stop_tol = *v;
  if (const auto v = r.number("sim", "escape_factor")) c.sim.escape_factor = *v;
  c.x0 = r.vector("sim", "x0");
  if (const auto v = r.integer("sim", "mc_count")) {
    if (*v < 1 || *v > std::numeric_limits<int>::max()) {
      r.fail(r.line_of("sim", "mc_count"), "[sim] mc_count must be >= 1");
    }
    c.mc_count = static_cast<int>(*v);
  }
  if (const auto v = r.unsigned_integer("sim", "mc_seed")) c.mc_seed = *v;
  c.ic_lower = r.vector("sim", "ic_lower");
  c.ic_upper = r.vector("sim", "ic_upper");

  if (!(c.sim.dt > 0.0)) r.fail(r.line_of("sim", "dt"), "[sim] dt must be positive");
  if (!(c.sim.t_max > 0.0)) r.fail(r.line_of("sim", "t_max"), "[sim] t_max must be positive");
  if (!(c.sim.stop_tol >= 0.0)) {
    r.fail(r.line_of("sim", "stop_tol"), "[sim] stop_tol must be non-negative");
  }
  if (!(c.sim.escape_factor > 0.0)) {
    r.fail(r.line_of("sim", "escape_factor"), "[sim] escape_factor must be positive");
  }
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line,
                         const std::string& message)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + message
                                  : source + ": " + message),
      line_(line) {}

ConfigDocument parse_config_document(const std::string& text,
                                     const std::string& source) {
  ConfigDocument doc;
  doc.source = source;
  std::istringstream in(text);
  std::string raw_line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw_line));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, line_no, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_identifier(section)) {
        throw ConfigError(source, line_no, "invalid section name '" + section + "'");
      }
      if (doc.section_lines.count(section)) {
        throw ConfigError(source, line_no, "duplicate section [" + section + "]");
      }
      doc.section_lines[section] = line_no;
      doc.sections[section];
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source, line_no, "expected 'key = value'");
    }
    if (section.empty()) {
      throw ConfigError(source, line_no, "key outside of any [section]");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_identifier(key)) {
      throw ConfigError(source, line_no, "invalid key '" + key + "'");
    }
    if (value.empty()) throw ConfigError(source, line_no, "missing value for '" + key + "'");
    if (doc.sections[section].count(key)) {
      throw ConfigError(source, line_no, "duplicate key '" + key + "' in [" + section + "]");
    }

    ConfigEntry entry;
    entry.line = line_no;
    entry.raw = value;
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') {
        throw ConfigError(source, line_no, "unterminated string");
      }
      entry.value = value.substr(1, value.size() - 2);
    } else if (value.front() == '[') {
      if (value.back() != ']') throw ConfigError(source, line_no, "unterminated array");
      std::vector<double> items;
      std::istringstream parts(value.substr(1, value.size() - 2));
      std::string item;
      while (std::getline(parts, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto d = parse_double(item);
        if (!d) throw ConfigError(source, line_no, "non-numeric array element '" + item + "'");
        items.push_back(*d);
      }
      entry.value = std::move(items);
    } else if (value == "true" || value == "false") {
      entry.value = value == "true";
    } else if (const auto d = parse_double(value)) {
      entry.value = *d;
    } else {
      entry.value = value;  // bare word
    }
    doc.sections[section][key] = std::move(entry);
  }
  return doc;
}

namespace {

// Line of the key a validation message names ("train.lambda" or
// "[sim] x0"), or 0 when it names none that was written.
int blamed_line(const ConfigDocument& doc, const std::string& message) {
  for (const auto& [section, entries] : doc.sections) {
    for (const auto& [key, entry] : entries) {
      if (message.find(section + "." + key + " ") != std::string::npos ||
          message.find("[" + section + "] " + key) != std::string::npos) {
        return entry.line;
      }
    }
  }
  return 0;
}

}  // namespace

RunConfig run_config_from_document(const ConfigDocument& doc) {
  static const std::set<std::string> kSections = {"problem", "network", "train",
                                                  "sim", "output"};
  for (const auto& [name, line] : doc.section_lines) {
    if (!kSections.count(name)) {
      throw ConfigError(doc.source, line, "unknown section [" + name + "]");
    }
  }
  Reader r(doc);
  if (!r.has_section("problem")) {
    r.fail(0, "missing [problem] section");
  }

  RunConfig c;
  read_problem(r, c.problem);
  c.train = default_train_config(c.problem.name);
  read_train(r, c.train);
  read_sim(r, c);
  if (const auto v = r.text("output", "dir")) c.output_dir = *v;
  r.reject_unused();

  try {
    const OcpInstance problem = make_problem(c.problem);
    c.train.validate();
    validate_policy_mode(problem, c.train.policy_mode);
    if (c.x0) require_dim(c.x0->size(), problem.state_dim(), "[sim] x0");
    if (c.ic_lower) require_dim(c.ic_lower->size(), problem.state_dim(), "[sim] ic_lower");
    if (c.ic_upper) require_dim(c.ic_upper->size(), problem.state_dim(), "[sim] ic_upper");
  } catch (const InvalidArgument& e) {
    throw ConfigError(doc.source, blamed_line(doc, e.what()), e.what());
  }
  return c;
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  return run_config_from_document(parse_config_document(text, source));
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.string());
}

std::string render_run_config(const RunConfig& c) {
  std::ostringstream o;
  const ProblemConfig& p = c.problem;
  o << "[problem]\n";
  o << "name = \"" << p.name << "\"\n";
  if (p.name == "pendulum") {
    o << "mass = " << fmt_double(p.pendulum.mass) << "\n";
    o << "length = " << fmt_double(p.pendulum.length) << "\n";
    o << "inertia_com = " << fmt_double(p.pendulum.inertia_com) << "\n";
    o << "gravity = " << fmt_double(p.pendulum.gravity) << "\n";
    o << "torque_limit = " << fmt_double(p.pendulum.torque_limit) << "\n";
    o << "q = " << fmt_vec(flatten(p.pendulum.q)) << "\n";
    o << "r = " << fmt_double(p.pendulum.r_weight) << "\n";
  }
  if (p.name == "detumbling") {
    o << "inertia = " << fmt_vec(flatten(p.detumbling.inertia)) << "\n";
    o << "q = " << fmt_vec(flatten(p.detumbling.q)) << "\n";
    o << "r = " << fmt_vec(flatten(p.detumbling.r)) << "\n";
  }
  if (p.domain_lower) o << "domain_lower = " << fmt_vec(*p.domain_lower) << "\n";
  if (p.domain_upper) o << "domain_upper = " << fmt_vec(*p.domain_upper) << "\n";
  if (p.u_min) o << "u_min = " << fmt_vec(*p.u_min) << "\n";
  if (p.u_max) o << "u_max = " << fmt_vec(*p.u_max) << "\n";

  const TrainConfig& t = c.train;
  o << "\n[network]\n";
  o << "hidden = " << t.hidden << "\n";
  o << "weight_scale = " << fmt_double(t.weight_scale) << "\n";
  o << "activation = \"swish\"\n";

  o << "\n[train]\n";
  o << "num_points = " << t.num_points << "\n";
  o << "sampling = \"" << to_string(t.sampling) << "\"\n";
  o << "seed = " << t.seed << "\n";
  o << "init_mode = \"" << to_string(t.init_mode) << "\"\n";
  o << "ridge = " << fmt_double(t.ridge) << "\n";
  o << "lambda = " << fmt_double(t.lambda) << "\n";
  o << "adam_lr = " << fmt_double(t.adam_lr) << "\n";
  o << "adam_epochs = " << t.adam_epochs << "\n";
  o << "scheduler = \"" << (t.scheduler.enabled ? "plateau_halving" : "none") << "\"\n";
  o << "patience = " << t.scheduler.patience << "\n";
  o << "factor = " << fmt_double(t.scheduler.factor) << "\n";
  o << "clip_norm = " << fmt_double(t.clip_norm) << "\n";
  o << "lbfgs_iters = " << t.lbfgs_iters << "\n";
  o << "lbfgs_memory = " << t.lbfgs_memory << "\n";
  o << "policy_mode = \"" << to_string(t.policy_mode) << "\"\n";
  o << "threads = " << t.threads << "\n";

  o << "\n[sim]\n";
  o << "dt = " << fmt_double(c.sim.dt) << "\n";
  o << "t_max = " << fmt_double(c.sim.t_max) << "\n";
  o << "stop_tol = " << fmt_double(c.sim.stop_tol) << "\n";
  o << "escape_factor = " << fmt_double(c.sim.escape_factor) << "\n";
  if (c.x0) o << "x0 = " << fmt_vec(*c.x0) << "\n";
  o << "mc_count = " << c.mc_count << "\n";
  o << "mc_seed = " << c.mc_seed << "\n";
  if (c.ic_lower) o << "ic_lower = " << fmt_vec(*c.ic_lower) << "\n";
  if (c.ic_upper) o << "ic_upper = " << fmt_vec(*c.ic_upper) << "\n";

  o << "\n[output]\n";
  o << "dir = \"" << c.output_dir << "\"\n";
  return o.str();
}

}  // namespace xtfc
