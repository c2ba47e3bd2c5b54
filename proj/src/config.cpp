#include "asymflow/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "asymflow/errors.hpp"

namespace asymflow {

namespace {

struct RawValue {
  std::string text;
  int line = 0;
};

using Section = std::map<std::string, RawValue>;

[[noreturn]] void fail(int line, const std::string& message) {
  throw usage_error("config line " + std::to_string(line) + ": " + message);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::map<std::string, Section> tokenize(const std::string& text) {
  std::map<std::string, Section> sections;
  std::string current;  // "" = top level
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) fail(line_no, "empty section name");
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    if (value.empty()) fail(line_no, "empty value for key '" + key + "'");
    sections[current][key] = {value, line_no};
  }
  return sections;
}

double parse_number(const RawValue& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v.text, &used);
    if (used != v.text.size()) fail(v.line, "trailing characters in number for '" + key + "'");
    if (!std::isfinite(x)) fail(v.line, "non-finite value for '" + key + "'");
    return x;
  } catch (const usage_error&) {
    throw;
  } catch (...) {
    fail(v.line, "expected a number for '" + key + "', got '" + v.text + "'");
  }
}

std::string parse_string(const RawValue& v, const std::string& key) {
  std::string s = v.text;
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  if (s.find(' ') != std::string::npos)
    fail(v.line, "unquoted string with spaces for '" + key + "'");
  return s;
}

std::vector<double> parse_array(const RawValue& v, const std::string& key) {
  std::string s = v.text;
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    fail(v.line, "expected [a, b, ...] for '" + key + "'");
  s = s.substr(1, s.size() - 2);
  std::vector<double> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(v.line, "empty element in array '" + key + "'");
    out.push_back(parse_number({item, v.line}, key));
  }
  if (out.empty()) fail(v.line, "empty array for '" + key + "'");
  return out;
}

std::vector<std::string> parse_string_array(const RawValue& v, const std::string& key) {
  std::string s = v.text;
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    fail(v.line, "expected [\"a\", ...] for '" + key + "'");
  s = s.substr(1, s.size() - 2);
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_string({item, v.line}, key));
  }
  return out;
}

class SectionReader {
 public:
  SectionReader(const std::map<std::string, Section>& sections, const std::string& name)
      : section_(find(sections, name)), name_(name) {}

  bool has(const std::string& key) const {
    return section_ != nullptr && section_->count(key) > 0;
  }
  double number(const std::string& key, double fallback) const {
    return has(key) ? parse_number(section_->at(key), qualified(key)) : fallback;
  }
  std::string str(const std::string& key, const std::string& fallback) const {
    return has(key) ? parse_string(section_->at(key), qualified(key)) : fallback;
  }
  std::vector<double> array(const std::string& key) const {
    return parse_array(section_->at(key), qualified(key));
  }
  std::vector<std::string> strings(const std::string& key) const {
    return parse_string_array(section_->at(key), qualified(key));
  }
  const Section* raw() const { return section_; }

 private:
  static const Section* find(const std::map<std::string, Section>& sections,
                             const std::string& name) {
    auto it = sections.find(name);
    return it == sections.end() ? nullptr : &it->second;
  }
  std::string qualified(const std::string& key) const {
    return name_.empty() ? key : name_ + "." + key;
  }
  const Section* section_;
  std::string name_;
};

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  const auto sections = tokenize(text);
  for (const auto& [name, _] : sections) {
    if (name != "" && name != "space" && name != "potential" && name != "flow" &&
        name != "solver" && name != "verify" && name != "output")
      throw usage_error("config: unknown section [" + name + "]");
  }
  ExperimentConfig cfg;

  SectionReader top(sections, "");
  cfg.seed = static_cast<std::uint64_t>(top.number("seed", 42));
  cfg.jobs = static_cast<int>(top.number("jobs", 1));

  SectionReader space(sections, "space");
  cfg.space_kind = space.str("kind", cfg.space_kind);
  cfg.dim = static_cast<int>(space.number("dim", cfg.dim));
  if (cfg.dim < 1) throw usage_error("config: space.dim must be >= 1");
  if (space.has("drift")) cfg.drift = space.array("drift");
  cfg.norm_name = space.str("norm", cfg.norm_name);
  if (space.has("norm_param")) cfg.norm_param = space.array("norm_param");

  SectionReader pot(sections, "potential");
  cfg.potential_name = pot.str("name", cfg.potential_name);
  if (pot.raw() != nullptr) {
    for (const auto& [key, value] : *pot.raw()) {
      if (key == "name") continue;
      if (!value.text.empty() && value.text.front() == '[')
        cfg.potential_vectors[key] = parse_array(value, "potential." + key);
      else
        cfg.potential_scalars[key] = parse_number(value, "potential." + key);
    }
  }

  SectionReader flow(sections, "flow");
  cfg.p = flow.number("p", cfg.p);
  if (!(cfg.p > 1.0)) throw usage_error("config: flow.p must be > 1");
  if (flow.has("lambda")) cfg.lambda = flow.number("lambda", 0.0);
  if (flow.has("x0")) cfg.x0 = flow.array("x0");
  cfg.horizon = flow.number("T", cfg.horizon);
  if (!(cfg.horizon > 0.0)) throw usage_error("config: flow.T must be > 0");
  if (flow.has("tau_sweep")) cfg.tau_sweep = flow.array("tau_sweep");

  SectionReader solver(sections, "solver");
  cfg.solver.tol = solver.number("tol", cfg.solver.tol);
  cfg.solver.arg_tol = solver.number("arg_tol", cfg.solver.arg_tol);
  cfg.solver.grad_tol = solver.number("grad_tol", cfg.solver.grad_tol);
  cfg.solver.max_iter = static_cast<int>(solver.number("max_iter", cfg.solver.max_iter));
  cfg.solver.n_restarts = static_cast<int>(solver.number("n_restarts", cfg.solver.n_restarts));
  cfg.solver.barrier_strength = solver.number("barrier_strength", cfg.solver.barrier_strength);
  cfg.solver.seed = cfg.seed;

  SectionReader verify(sections, "verify");
  if (verify.has("checks")) cfg.checks = verify.strings("checks");

  SectionReader output(sections, "output");
  cfg.out_dir = output.str("dir", cfg.out_dir);
  cfg.prefix = output.str("prefix", cfg.prefix);

  if (cfg.x0.empty()) cfg.x0 = zeros(static_cast<std::size_t>(cfg.dim));
  if (static_cast<int>(cfg.x0.size()) != cfg.dim)
    throw usage_error("config: flow.x0 length does not match space.dim");
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace asymflow
