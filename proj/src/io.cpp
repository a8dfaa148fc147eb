#include "akstab/io.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <fstream>

#include "akstab/errors.hpp"

namespace akstab::io {

namespace {

constexpr char kMagic[4] = {'A', 'K', 'F', '4'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_doubles(std::ofstream& out, const double* data, std::size_t count) {
  static_assert(sizeof(double) == 8);
  // host is little-endian on every supported target; values are IEEE f64
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 8));
}

void read_doubles(std::ifstream& in, double* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * 8));
  if (!in) throw IoError("truncated AKF4 payload");
}

void write_header(std::ofstream& out, int n, int component_count) {
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(n));
  write_u32(out, static_cast<std::uint32_t>(component_count));
  write_u32(out, 0);
}

struct Header {
  int n = 0;
  int component_count = 0;
};

Header read_header(std::ifstream& in, const std::string& path) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("not an AKF4 file: " + path);
  std::uint32_t version = read_u32(in);
  if (version != kVersion) throw IoError("unsupported AKF4 version in " + path);
  Header h;
  h.n = static_cast<int>(read_u32(in));
  h.component_count = static_cast<int>(read_u32(in));
  std::uint32_t reserved = read_u32(in);
  if (reserved != 0) throw IoError("nonzero reserved field in " + path);
  return h;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  return in;
}

}  // namespace

void write_scalar(const std::string& path, const ScalarField& f) {
  std::ofstream out = open_out(path);
  write_header(out, f.grid().n, 1);
  write_doubles(out, f.data(), f.size());
  if (!out) throw IoError("write failed: " + path);
}

ScalarField read_scalar(const std::string& path) {
  std::ifstream in = open_in(path);
  Header h = read_header(in, path);
  if (h.component_count != 1) throw IoError("expected 1 component in " + path);
  ScalarField f(GridSpec::checked(h.n));
  read_doubles(in, f.data(), f.size());
  return f;
}

void write_form(const std::string& path, const Form& f) {
  std::ofstream out = open_out(path);
  write_header(out, f.grid().n, f.component_count());
  write_u32(out, static_cast<std::uint32_t>(f.rank()));
  for (int c = 0; c < f.component_count(); ++c)
    write_doubles(out, f.comp(c).data(), f.comp(c).size());
  if (!out) throw IoError("write failed: " + path);
}

Form read_form(const std::string& path) {
  std::ifstream in = open_in(path);
  Header h = read_header(in, path);
  int rank = static_cast<int>(read_u32(in));
  if (rank < 0 || rank > 4 || form_component_count(rank) != h.component_count)
    throw IoError("rank tag inconsistent with component count in " + path);
  Form f(rank, GridSpec::checked(h.n));
  for (int c = 0; c < f.component_count(); ++c)
    read_doubles(in, f.comp(c).data(), f.comp(c).size());
  return f;
}

void write_endomorphism(const std::string& path, const EndomorphismField& J) {
  std::ofstream out = open_out(path);
  write_header(out, J.grid().n, 16);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) write_doubles(out, J.comp(a, b).data(), J.comp(a, b).size());
  if (!out) throw IoError("write failed: " + path);
}

EndomorphismField read_endomorphism(const std::string& path) {
  std::ifstream in = open_in(path);
  Header h = read_header(in, path);
  if (h.component_count != 16) throw IoError("expected 16 components in " + path);
  EndomorphismField J(GridSpec::checked(h.n));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) read_doubles(in, J.comp(a, b).data(), J.comp(a, b).size());
  return J;
}

Config config_from_json(const nlohmann::json& j) {
  Config cfg;
  cfg.n = j.value("grid", nlohmann::json::object()).value("n", 16);

  const auto& pj = j.at("path");
  std::string kind = pj.value("kind", "constant_linear");
  double t_max = pj.value("t_max", 0.5);
  cfg.path_samples = pj.value("samples", 9);
  if (kind == "constant_linear") {
    std::array<double, 16> S{};
    if (pj.contains("S")) {
      const auto& sj = pj.at("S");
      if (!sj.is_array() || sj.size() != 4) throw ConfigError("path.S must be a 4x4 matrix");
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) S[static_cast<std::size_t>(4 * a + b)] = sj.at(a).at(b).get<double>();
    }
    cfg.path = DeformationPath::constant_linear(S, t_max);
  } else if (kind == "bump_metric") {
    if (!pj.contains("S")) {
      cfg.path = DeformationPath::standard_bump(t_max);
    } else {
      std::vector<BumpEntry> entries;
      for (const auto& ej : pj.at("S")) {
        BumpEntry e;
        e.i = ej.at("i").get<int>();
        e.j = ej.at("j").get<int>();
        for (const auto& tj : ej.at("terms")) {
          BumpTerm term;
          term.amp = tj.at("amp").get<double>();
          for (const auto& fj : tj.value("factors", nlohmann::json::array())) {
            BumpTerm::Factor fac;
            std::string fn = fj.value("fn", "sin");
            fac.is_sin = (fn == "sin");
            if (fn != "sin" && fn != "cos") throw ConfigError("factor fn must be sin or cos");
            fac.axis = fj.at("axis").get<int>();
            fac.freq = fj.value("freq", 1);
            term.factors.push_back(fac);
          }
          e.terms.push_back(std::move(term));
        }
        entries.push_back(std::move(e));
      }
      cfg.path = DeformationPath::bump_metric(std::move(entries), t_max);
    }
  } else if (kind == "user_file") {
    std::string file = pj.at("file").get<std::string>();
    EndomorphismField J = read_endomorphism(file);
    CompatibleStructure s = CompatibleStructure::omega_compatible(std::move(J));
    cfg.path = DeformationPath::user_file(s.g(), t_max);
  } else {
    throw ConfigError("unknown path.kind: " + kind);
  }

  if (j.contains("solver")) {
    const auto& sj = j.at("solver");
    cfg.solver.t_max = sj.value("t_max", t_max);
    cfg.solver.steps = sj.value("steps", 10);
    cfg.solver.newton_tol = sj.value("newton_tol", 1e-8);
    cfg.solver.max_newton_iters = sj.value("max_newton_iters", 12);
    cfg.solver.fd_epsilon = sj.value("fd_epsilon", 1e-5);
    cfg.solver.ker_tol = sj.value("ker_tol", 1e-6);
  } else {
    cfg.solver.t_max = t_max;
  }
  cfg.solver.n = cfg.n;
  cfg.output_dir = j.value("output", nlohmann::json::object()).value("dir", "out");
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config structure error: ") + e.what());
  }
}

nlohmann::json result_to_json(const ContinuationResult& result) {
  nlohmann::json j;
  j["status"] = result.status;
  j["h_minus_base"] = result.h_minus_base;
  j["steps"] = nlohmann::json::array();
  for (const auto& s : result.steps) {
    nlohmann::json sj;
    sj["t"] = s.t;
    sj["residual_norm"] = s.residual_norm;
    sj["newton_iters"] = s.newton_iters;
    sj["h_minus"] = s.h_minus;
    sj["gap"] = s.gap;
    sj["killing_defect"] = s.killing_defect;
    sj["calabi_energy"] = s.calabi_energy;
    sj["status"] = s.status;
    j["steps"].push_back(std::move(sj));
  }
  return j;
}

}  // namespace akstab::io
