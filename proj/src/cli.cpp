#include "touchpoint/cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <limits>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "touchpoint/cycles.hpp"
#include "touchpoint/monotone.hpp"
#include "touchpoint/touching.hpp"

namespace touchpoint::cli {

using convex::ConvexSet;
using hilbert::LinearOperator;
using hilbert::Matrix;
using hilbert::Vector;
using json = nlohmann::json;

ParseError::ParseError(const std::string& field, int line, const std::string& message)
    : InputError("parse error" + (line > 0 ? " at line " + std::to_string(line) : std::string()) + ": field '" +
                 field + "': " + message),
      field_(field),
      line_(line) {}

namespace {

// ---------------------------------------------------------------------------
// JSON with source lines.

// Input iterator that counts newlines as the parser consumes them.
class LineCountingIterator {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  LineCountingIterator(const char* p, int* line) : p_(p), line_(line) {}
  reference operator*() const { return *p_; }
  LineCountingIterator& operator++() {
    if (*p_ == '\n') ++*line_;
    ++p_;
    return *this;
  }
  LineCountingIterator operator++(int) {
    auto copy = *this;
    ++*this;
    return copy;
  }
  bool operator==(const LineCountingIterator& o) const { return p_ == o.p_; }
  bool operator!=(const LineCountingIterator& o) const { return p_ != o.p_; }

 private:
  const char* p_;
  int* line_;
};

struct SourceDocument {
  json root;
  std::map<std::string, int> lines;

  int line_of(const std::string& path) const {
    auto it = lines.find(path);
    return it == lines.end() ? 0 : it->second;
  }
};

SourceDocument parse_with_lines(const std::string& text) {
  struct Frame {
    bool array;
    int index = 0;
    std::string key;
  };
  SourceDocument doc;
  std::vector<Frame> frames;
  int line = 1;

  auto path = [&frames]() {
    std::string p;
    for (const auto& f : frames) {
      if (f.array) {
        p += "[" + std::to_string(f.index) + "]";
      } else if (!f.key.empty()) {
        p += (p.empty() ? "" : ".") + f.key;
      }
    }
    return p;
  };
  auto finish_element = [&frames]() {
    if (!frames.empty() && frames.back().array) ++frames.back().index;
  };
  auto record = [&](const std::string& p) { doc.lines.emplace(p, line); };

  auto callback = [&](int, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        record(path());
        frames.push_back(Frame{false, 0, {}});
        break;
      case json::parse_event_t::array_start:
        record(path());
        frames.push_back(Frame{true, 0, {}});
        break;
      case json::parse_event_t::key:
        frames.back().key = parsed.get<std::string>();
        record(path());
        break;
      case json::parse_event_t::value:
        if (!frames.empty() && frames.back().array) {
          record(path());
          ++frames.back().index;
        }
        break;
      case json::parse_event_t::object_end:
      case json::parse_event_t::array_end:
        frames.pop_back();
        finish_element();
        break;
    }
    return true;
  };

  const char* begin = text.data();
  try {
    doc.root = json::parse(LineCountingIterator(begin, &line), LineCountingIterator(begin + text.size(), &line),
                           callback);
  } catch (const json::parse_error& e) {
    throw ParseError("<document>", line, std::string("malformed JSON: ") + e.what());
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Field readers.

class FieldReader {
 public:
  FieldReader(const SourceDocument& doc) : doc_(doc) {}

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    throw ParseError(path, line_near(path), message);
  }

  const json& require(const json& object, const std::string& parent, const std::string& key) const {
    const std::string path = join(parent, key);
    if (!object.is_object()) fail(parent.empty() ? "<document>" : parent, "expected an object");
    auto it = object.find(key);
    if (it == object.end()) fail(path, "missing field");
    return *it;
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "expected a finite number");
    return x;
  }

  // Accepts numbers and, when `allow_infinite`, the strings "inf", "+inf", "-inf".
  Vector vector(const json& v, const std::string& path, Eigen::Index expected, bool allow_infinite = false) const {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    if (expected >= 0 && static_cast<Eigen::Index>(v.size()) != expected) {
      fail(path, "dimension mismatch (expected " + std::to_string(expected) + " entries, got " +
                     std::to_string(v.size()) + ")");
    }
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string at = path + "[" + std::to_string(i) + "]";
      const json& entry = v[i];
      if (allow_infinite && entry.is_string()) {
        const auto s = entry.get<std::string>();
        if (s == "inf" || s == "+inf") {
          out(static_cast<Eigen::Index>(i)) = std::numeric_limits<double>::infinity();
        } else if (s == "-inf") {
          out(static_cast<Eigen::Index>(i)) = -std::numeric_limits<double>::infinity();
        } else {
          fail(at, "expected a number or \"inf\"/\"-inf\"");
        }
        continue;
      }
      out(static_cast<Eigen::Index>(i)) = number(entry, at);
    }
    return out;
  }

  Matrix matrix(const json& v, const std::string& path) const {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    Matrix out(rows, rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      out.row(r) = vector(v[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]", rows).transpose();
    }
    return out;
  }

  static std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
  }

 private:
  // Line of the path itself, else of its closest recorded ancestor.
  int line_near(std::string path) const {
    while (!path.empty()) {
      if (int l = doc_.line_of(path); l > 0) return l;
      const auto cut = path.find_last_of(".[");
      if (cut == std::string::npos) break;
      path.resize(cut);
    }
    return doc_.line_of("");
  }

  const SourceDocument& doc_;
};

void reject_unknown_keys(const FieldReader& reader, const json& object, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : object.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) reader.fail(FieldReader::join(path, key), "unknown field");
  }
}

ConvexSet parse_set(const FieldReader& reader, const json& d, const std::string& path, Eigen::Index m) {
  if (!d.is_object()) reader.fail(path, "expected a set descriptor object");
  const json& type_field = reader.require(d, path, "type");
  if (!type_field.is_string()) reader.fail(path + ".type", "expected a string");
  const std::string type = type_field.get<std::string>();
  auto field = [&](const char* key) -> const json& { return reader.require(d, path, key); };
  auto at = [&](const char* key) { return path + "." + key; };

  try {
    if (type == "ball") {
      reject_unknown_keys(reader, d, path, {"type", "center", "radius"});
      return ConvexSet::ball(reader.vector(field("center"), at("center"), m),
                             reader.number(field("radius"), at("radius")));
    }
    if (type == "box") {
      reject_unknown_keys(reader, d, path, {"type", "lower", "upper"});
      return ConvexSet::box(reader.vector(field("lower"), at("lower"), m, true),
                            reader.vector(field("upper"), at("upper"), m, true));
    }
    if (type == "halfspace") {
      reject_unknown_keys(reader, d, path, {"type", "normal", "offset"});
      return ConvexSet::halfspace(reader.vector(field("normal"), at("normal"), m),
                                  reader.number(field("offset"), at("offset")));
    }
    if (type == "affine") {
      reject_unknown_keys(reader, d, path, {"type", "basepoint", "spanning"});
      Vector base = reader.vector(field("basepoint"), at("basepoint"), m);
      Matrix span(m, 0);
      if (auto it = d.find("spanning"); it != d.end()) {
        if (!it->is_array()) reader.fail(at("spanning"), "expected an array of vectors");
        span.resize(m, static_cast<Eigen::Index>(it->size()));
        for (std::size_t j = 0; j < it->size(); ++j) {
          span.col(static_cast<Eigen::Index>(j)) =
              reader.vector((*it)[j], at("spanning") + "[" + std::to_string(j) + "]", m);
        }
      }
      return ConvexSet::affine_span(std::move(base), span);
    }
    if (type == "singleton") {
      reject_unknown_keys(reader, d, path, {"type", "point"});
      return ConvexSet::singleton(reader.vector(field("point"), at("point"), m));
    }
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& e) {
    reader.fail(path, e.what());
  }
  reader.fail(path + ".type", "unknown set type '" + type + "'");
}

SolverSettings parse_solver(const FieldReader& reader, const json& s) {
  SolverSettings out;
  if (!s.is_object()) reader.fail("solver", "expected an object");
  reject_unknown_keys(reader, s, "solver", {"tolerance", "max_iterations", "gamma", "seed"});
  if (auto it = s.find("tolerance"); it != s.end()) {
    out.tolerance = reader.number(*it, "solver.tolerance");
    if (!(out.tolerance > 0.0)) reader.fail("solver.tolerance", "must be positive");
  }
  if (auto it = s.find("max_iterations"); it != s.end()) {
    if (!it->is_number_integer() || it->get<long long>() <= 0 ||
        it->get<long long>() > std::numeric_limits<int>::max()) {
      reader.fail("solver.max_iterations", "must be a positive integer");
    }
    out.max_iterations = static_cast<int>(it->get<long long>());
  }
  if (auto it = s.find("gamma"); it != s.end()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "auto") reader.fail("solver.gamma", "expected \"auto\" or a positive number");
    } else {
      out.gamma = reader.number(*it, "solver.gamma");
      if (!(*out.gamma > 0.0)) reader.fail("solver.gamma", "must be positive");
    }
  }
  if (auto it = s.find("seed"); it != s.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 0) reader.fail("solver.seed", "must be a nonnegative integer");
    out.seed = it->get<std::uint64_t>();
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

ProblemSpec parse_problem_text(const std::string& text) {
  const SourceDocument doc = parse_with_lines(text);
  const FieldReader reader(doc);
  const json& root = doc.root;
  if (!root.is_object()) reader.fail("<document>", "expected a JSON object");
  reject_unknown_keys(reader, root, "", {"base_dimension", "sets", "solver", "operator", "description"});

  ProblemSpec spec;
  const json& dim = reader.require(root, "", "base_dimension");
  if (!dim.is_number_integer() || dim.get<long long>() <= 0) reader.fail("base_dimension", "must be a positive integer");
  spec.base_dimension = static_cast<Eigen::Index>(dim.get<long long>());

  const json& sets = reader.require(root, "", "sets");
  if (!sets.is_array() || sets.empty()) reader.fail("sets", "expected a non-empty array of set descriptors");
  for (std::size_t i = 0; i < sets.size(); ++i) {
    spec.sets.push_back(parse_set(reader, sets[i], "sets[" + std::to_string(i) + "]", spec.base_dimension));
  }

  if (auto it = root.find("solver"); it != root.end()) spec.solver = parse_solver(reader, *it);

  if (auto it = root.find("operator"); it != root.end()) {
    Matrix op = reader.matrix(*it, "operator");
    const auto n = spec.base_dimension * static_cast<Eigen::Index>(spec.sets.size());
    if (op.rows() != n) {
      reader.fail("operator", "dimension mismatch (expected " + std::to_string(n) + "x" + std::to_string(n) + ")");
    }
    spec.operator_matrix = std::move(op);
  }
  return spec;
}

ProblemSpec parse_problem(const std::filesystem::path& path) { return parse_problem_text(read_file(path)); }

Matrix parse_matrix_text(const std::string& text) {
  const SourceDocument doc = parse_with_lines(text);
  const FieldReader reader(doc);
  if (doc.root.is_object()) return reader.matrix(reader.require(doc.root, "", "matrix"), "matrix");
  return reader.matrix(doc.root, "<document>");
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1) {
    throw Error("sha256: digest computation failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

nlohmann::ordered_json Report::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["inputs_digest"] = inputs_digest;
  j["outputs"] = outputs;
  j["residuals"] = residuals;
  j["thresholds"] = thresholds;
  j["notes"] = notes;
  j["pass"] = pass;
  j["iterations"] = iterations;
  j["wall_time_ms"] = wall_time_ms;
  return j;
}

namespace {

// ---------------------------------------------------------------------------
// Commands.

struct Flags {
  std::string matrix_file;
  std::string problem_file;
  std::string out_file;
  std::optional<double> mu;
  std::optional<double> lambda;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::string> gamma;
  std::optional<std::uint64_t> seed;
  bool classical = false;
};

std::vector<double> as_list(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void absorb(Report& report, const VerificationReport& v) {
  for (const auto& c : v.checks()) {
    report.residuals[c.name] = c.value;
    report.thresholds[c.name] = c.threshold;
  }
  for (const auto& [name, value] : v.values()) report.outputs["values"][name] = value;
  for (const auto& n : v.notes()) report.notes.push_back(n);
}

void finish(Report& report) {
  report.pass = true;
  for (const auto& [name, value] : report.residuals) {
    report.pass = report.pass && value <= report.thresholds.at(name);
  }
}

SolverSettings effective_settings(const ProblemSpec& spec, const Flags& flags) {
  SolverSettings s = spec.solver;
  if (flags.tol) {
    if (!(*flags.tol > 0.0)) throw ParameterError("--tol must be positive");
    s.tolerance = *flags.tol;
  }
  if (flags.max_iter) {
    if (*flags.max_iter <= 0) throw ParameterError("--max-iter must be positive");
    s.max_iterations = *flags.max_iter;
  }
  if (flags.gamma) {
    if (*flags.gamma == "auto") {
      s.gamma.reset();
    } else {
      try {
        std::size_t used = 0;
        s.gamma = std::stod(*flags.gamma, &used);
        if (used != flags.gamma->size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParameterError("--gamma must be \"auto\" or a number");
      }
    }
  }
  if (flags.seed) s.seed = *flags.seed;
  return s;
}

std::string canonical_flags(const SolverSettings& s, const Flags& flags) {
  std::ostringstream o;
  o << std::setprecision(17) << "tol=" << s.tolerance << ";max_iter=" << s.max_iterations
    << ";gamma=" << (s.gamma ? std::to_string(*s.gamma) : "auto") << ";seed=" << s.seed;
  if (flags.lambda) o << ";lambda=" << *flags.lambda;
  if (flags.mu) o << ";mu=" << *flags.mu;
  if (flags.classical) o << ";classical";
  return o.str();
}

touching::TouchOptions touch_options(const SolverSettings& s) {
  touching::TouchOptions o;
  o.tol = s.tolerance;
  o.max_iter = s.max_iterations;
  o.gamma = s.gamma;
  return o;
}

cycles::CycleOptions cycle_options(const SolverSettings& s) {
  cycles::CycleOptions o;
  o.tol = s.tolerance;
  o.max_iter = s.max_iterations;
  o.gamma = s.gamma;
  return o;
}

Report check_unmonotone(const Flags& flags) {
  if (flags.matrix_file.empty()) throw InputError("check-unmonotone requires --matrix FILE");
  if (!flags.mu) throw InputError("check-unmonotone requires --mu X");
  const std::string text = read_file(flags.matrix_file);
  const LinearOperator q(parse_matrix_text(text));
  const auto check = monotone::is_mu_unmonotone(q, *flags.mu);

  Report r;
  r.command = "check-unmonotone";
  std::ostringstream mu;
  mu << std::setprecision(17) << *flags.mu;
  r.inputs_digest = sha256_hex("check-unmonotone\n" + text + "\nmu=" + mu.str());
  r.outputs["mu"] = check.certificate.mu;
  r.outputs["max_eig"] = check.certificate.max_eig;
  r.outputs["operator_norm_q"] = check.certificate.operator_norm_q;
  r.outputs["unmonotone"] = check.holds;
  const double norm = check.certificate.operator_norm_q;
  r.residuals["max_eig"] = check.certificate.max_eig;
  r.thresholds["max_eig"] = monotone::kSpectralSlack * (1.0 + norm * norm);
  finish(r);
  return r;
}

// Largest lambda with <y,Qy> + lambda|y|^2 <= 0.
double admissible_lambda(const LinearOperator& q) {
  const double lambda = -hilbert::max_sym_eigenvalue(q);
  if (!(lambda > 0.0)) {
    throw PreconditionError("operator admits no lambda > 0 with <y,Qy> + lambda|y|^2 <= 0 (lambda_max(sym Q) = " +
                            std::to_string(-lambda) + ")");
  }
  return lambda;
}

monotone::ResolventOracle product_indicator(const ProblemSpec& spec) {
  std::vector<convex::ProxFunction> blocks;
  for (const auto& c : spec.sets) blocks.push_back(convex::ProxFunction::indicator(c));
  return monotone::ResolventOracle::subdifferential(convex::ProxFunction::separable_sum(std::move(blocks)));
}

void put_touch(Report& r, const touching::TouchResult& t, const Vector& d, const Vector& e) {
  r.outputs["d"] = as_list(d);
  r.outputs["e"] = as_list(e);
  r.outputs["lambda"] = t.lambda;
  r.outputs["mu"] = t.mu;
  r.outputs["gamma"] = t.gamma;
  r.outputs["contraction_bound"] = t.contraction_bound;
  r.iterations = t.iterations;
  r.residuals["graph_residual"] = t.graph_residual;
  r.thresholds["graph_residual"] = 1e-8 * std::max(1.0, d.norm());
}

Report touch_command(const ProblemSpec& spec, const SolverSettings& s, const Flags& flags) {
  Report r;
  r.command = "touch";
  if (spec.operator_matrix) {
    const LinearOperator q(*spec.operator_matrix);
    const auto m = product_indicator(spec);
    const double lambda = flags.lambda.value_or(admissible_lambda(q));
    const auto t = touching::touch(m, q, lambda, touch_options(s));
    put_touch(r, t, t.d, t.e);
    r.notes.push_back("M = normal cone of the product set, Q = problem operator");
  } else {
    const auto p = cycles::build_problem(spec.sets, spec.base_dimension);
    const auto m = monotone::ResolventOracle::subspace_restricted(p.f_star, p.y);
    const LinearOperator q = hilbert::invert(p.s_on_y);
    const auto t = touching::touch(m, q, flags.lambda.value_or(0.5), touch_options(s));
    put_touch(r, t, p.y.embed(t.d), p.y.embed(t.e));
    r.notes.push_back("M = subdifferential of f* restricted to Y, Q = (S|_Y)^{-1}; d, e in product coordinates");
  }
  finish(r);
  return r;
}

Report fixed_point_command(const ProblemSpec& spec, const SolverSettings& s, const Flags& flags) {
  Report r;
  r.command = "fixed-point";
  if (spec.operator_matrix) {
    const LinearOperator t(*spec.operator_matrix);
    const auto m = product_indicator(spec);
    const double lambda = flags.lambda.value_or(admissible_lambda(hilbert::invert(t)));
    const auto res = touching::fixed_point(m, t, lambda, touch_options(s));
    put_touch(r, res, res.d, res.e);
    r.outputs["fixed_point"] = as_list(res.e);
    r.notes.push_back("M = normal cone of the product set, T = problem operator");
  } else {
    const auto p = cycles::build_problem(spec.sets, spec.base_dimension);
    const auto m = monotone::ResolventOracle::subspace_restricted(p.f_star, p.y);
    const auto res = touching::fixed_point(m, p.s_on_y, flags.lambda.value_or(0.5), touch_options(s));
    const Vector e = p.y.embed(res.e);
    put_touch(r, res, p.y.embed(res.d), e);
    r.outputs["fixed_point"] = as_list(e);
    r.notes.push_back("M = subdifferential of f* restricted to Y, T = S|_Y; vectors in product coordinates");
  }
  finish(r);
  return r;
}

Report cycle_command(const std::string& name, const ProblemSpec& spec, const SolverSettings& s, bool classical) {
  const auto p = cycles::build_problem(spec.sets, spec.base_dimension);
  auto sol = cycles::generalized_cycle(p, cycle_options(s));
  if (classical) {
    sol.classical_cycle = cycles::classical_cycle(p, Vector::Zero(p.base_dim), s.tolerance, s.max_iterations);
    sol.identity_report = cycles::verify_identities(p, sol, s.seed);
  }

  Report r;
  r.command = name;
  r.outputs["N"] = p.count();
  r.outputs["m"] = p.base_dim;
  r.outputs["e"] = as_list(sol.e);
  r.outputs["d"] = as_list(sol.d);
  if (classical) {
    r.outputs["classical_cycle"] =
        sol.classical_cycle ? nlohmann::ordered_json(as_list(*sol.classical_cycle)) : nlohmann::ordered_json(nullptr);
  }
  r.iterations = sol.solver.iterations;
  absorb(r, sol.identity_report);
  finish(r);
  return r;
}

Report dispatch(const std::string& command, const Flags& flags) {
  if (command == "check-unmonotone") return check_unmonotone(flags);
  if (flags.problem_file.empty()) throw InputError(command + " requires --problem FILE");
  const std::string text = read_file(flags.problem_file);
  const ProblemSpec spec = parse_problem_text(text);
  const SolverSettings s = effective_settings(spec, flags);

  Report r;
  if (command == "touch") {
    r = touch_command(spec, s, flags);
  } else if (command == "fixed-point") {
    r = fixed_point_command(spec, s, flags);
  } else if (command == "cycle") {
    r = cycle_command(command, spec, s, flags.classical);
  } else {
    r = cycle_command(command, spec, s, true);
  }
  r.inputs_digest = sha256_hex(command + "\n" + text + "\n" + canonical_flags(s, flags));
  return r;
}

void emit(const nlohmann::ordered_json& doc, std::ostream& out, const std::string& out_file) {
  const std::string text = doc.dump(2) + "\n";
  out << text;
  if (!out_file.empty()) {
    std::ofstream f(out_file, std::ios::binary);
    if (!f) throw InputError("cannot write '" + out_file + "'");
    f << text;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Touching points of monotone and unmonotone operators; generalized cycles of convex sets"};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--tol", flags.tol, "Stopping tolerance");
    sub->add_option("--max-iter", flags.max_iter, "Iteration cap");
    sub->add_option("--gamma", flags.gamma, "Step size or \"auto\"");
    sub->add_option("--seed", flags.seed, "Seed for randomized checks");
    sub->add_option("--out", flags.out_file, "Also write the report to FILE");
  };

  auto* check = app.add_subcommand("check-unmonotone", "Spectral mu-unmonotonicity test of a matrix");
  check->add_option("--matrix", flags.matrix_file, "JSON matrix file")->required();
  check->add_option("--mu", flags.mu, "Modulus mu > 0")->required();
  add_common(check);

  auto* touch = app.add_subcommand("touch", "Touching point of M and Q");
  touch->add_option("--problem", flags.problem_file, "Problem file")->required();
  touch->add_option("--lambda", flags.lambda, "lambda in <y,Qy> + lambda|y|^2 <= 0");
  add_common(touch);

  auto* fixed = app.add_subcommand("fixed-point", "Unique fixed point of M T");
  fixed->add_option("--problem", flags.problem_file, "Problem file")->required();
  fixed->add_option("--lambda", flags.lambda, "lambda in <x,Tx> + lambda|Tx|^2 <= 0");
  add_common(fixed);

  auto* cycle = app.add_subcommand("cycle", "Generalized cycle and gap vector");
  cycle->add_option("--problem", flags.problem_file, "Problem file")->required();
  cycle->add_flag("--classical", flags.classical, "Also search for a classical cycle");
  add_common(cycle);

  auto* verify = app.add_subcommand("verify", "Generalized and classical cycle with every identity check");
  verify->add_option("--problem", flags.problem_file, "Problem file")->required();
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };

  auto failure = [&](const std::string& message, int status, std::optional<double> residual) {
    Report r;
    r.command = command;
    r.outputs["error"] = message;
    if (residual) {
      r.residuals["last_residual"] = *residual;
      r.thresholds["last_residual"] = flags.tol.value_or(SolverSettings{}.tolerance);
    }
    r.pass = false;
    r.wall_time_ms = elapsed_ms();
    err << "error: " << message << "\n";
    try {
      emit(r.to_json(), out, flags.out_file);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
    }
    return status;
  };

  try {
    Report report = dispatch(command, flags);
    report.wall_time_ms = elapsed_ms();
    emit(report.to_json(), out, flags.out_file);
    return report.pass ? kExitPass : kExitNotPassed;
  } catch (const ConvergenceError& e) {
    return failure(e.what(), kExitConvergence, e.residual());
  } catch (const Error& e) {
    return failure(e.what(), kExitInputError, std::nullopt);
  }
}

}  // namespace touchpoint::cli
