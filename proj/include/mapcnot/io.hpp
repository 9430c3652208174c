// Copyright 2026 The mapcnot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MAPCNOT_IO_HPP_
#define MAPCNOT_IO_HPP_

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "mapcnot/calibration.hpp"
#include "mapcnot/device.hpp"
#include "mapcnot/gates.hpp"
#include "mapcnot/tomography.hpp"

namespace mapcnot {

using Json = nlohmann::ordered_json;
using Ptree = boost::property_tree::ptree;
namespace fs = std::filesystem;

// Fixed-format number text so repeated runs are byte-identical.
inline std::string fmt_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline Ptree parse_ini(const std::string& text) {
  Ptree pt;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::kConfigError, std::string("config parse: ") + e.message() + " at line " + std::to_string(e.line()));
  }
  return pt;
}

inline Ptree load_ini(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfigError, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ini(ss.str());
}

template <class T>
T get_or(const Ptree& pt, const std::string& key, T fallback) {
  if (!pt.get_child_optional(key)) return fallback;
  try {
    return pt.get<T>(key);
  } catch (const boost::property_tree::ptree_error& e) {
    fail(ErrorCode::kConfigError, "bad value for " + key + ": " + e.what());
  }
}

inline bool get_flag(const Ptree& pt, const std::string& key, bool fallback) {
  const auto v = pt.get_optional<std::string>(key);
  if (!v) return fallback;
  if (*v == "on" || *v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "off" || *v == "false" || *v == "0" || *v == "no") return false;
  fail(ErrorCode::kConfigError, "bad flag for " + key + ": " + *v);
}

// Unit-suffixed flat keys.
inline DeviceSpec device_from_ptree(const Ptree& pt) {
  DeviceSpec s;
  s.q1_w01 = get_or(pt, "q1_w01_ghz", s.q1_w01);
  s.q1_w12 = get_or(pt, "q1_w12_ghz", s.q1_w12);
  s.q2_w01 = get_or(pt, "q2_w01_ghz", s.q2_w01);
  s.q2_w12 = get_or(pt, "q2_w12_ghz", s.q2_w12);
  s.alpha1 = get_or(pt, "alpha1_mhz", s.alpha1);
  s.alpha2 = get_or(pt, "alpha2_mhz", s.alpha2);
  s.g = get_or(pt, "g_mhz", s.g);
  s.cavity_freq = get_or(pt, "cavity_freq_ghz", s.cavity_freq);
  s.t1_q1 = get_or(pt, "t1_q1_us", s.t1_q1);
  s.t1_q2 = get_or(pt, "t1_q2_us", s.t1_q2);
  s.t2star_q1 = get_or(pt, "t2star_q1_us", s.t2star_q1);
  s.t2star_q2 = get_or(pt, "t2star_q2_us", s.t2star_q2);
  s.levels_per_transmon = get_or(pt, "levels_per_transmon", s.levels_per_transmon);
  s.cavity_levels = get_or(pt, "cavity_levels", s.cavity_levels);
  s.j_eff = get_or(pt, "j_eff_mhz", s.j_eff);
  s.flux_offset = get_or(pt, "flux_offset_mhz", s.flux_offset);
  try {
    s.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kConfigError, std::string("device: ") + e.what());
  }
  return s;
}

inline std::string device_to_ini(const DeviceSpec& s) {
  std::ostringstream o;
  o << "q1_w01_ghz = " << fmt_num(s.q1_w01) << "\n"
    << "q1_w12_ghz = " << fmt_num(s.q1_w12) << "\n"
    << "q2_w01_ghz = " << fmt_num(s.q2_w01) << "\n"
    << "q2_w12_ghz = " << fmt_num(s.q2_w12) << "\n"
    << "alpha1_mhz = " << fmt_num(s.alpha1) << "\n"
    << "alpha2_mhz = " << fmt_num(s.alpha2) << "\n"
    << "g_mhz = " << fmt_num(s.g) << "\n"
    << "cavity_freq_ghz = " << fmt_num(s.cavity_freq) << "\n"
    << "t1_q1_us = " << fmt_num(s.t1_q1) << "\n"
    << "t1_q2_us = " << fmt_num(s.t1_q2) << "\n"
    << "t2star_q1_us = " << fmt_num(s.t2star_q1) << "\n"
    << "t2star_q2_us = " << fmt_num(s.t2star_q2) << "\n"
    << "levels_per_transmon = " << s.levels_per_transmon << "\n"
    << "cavity_levels = " << s.cavity_levels << "\n"
    << "j_eff_mhz = " << fmt_num(s.j_eff) << "\n"
    << "flux_offset_mhz = " << fmt_num(s.flux_offset) << "\n";
  return o.str();
}

inline ReadoutModel readout_from_ptree(const Ptree& pt) {
  ReadoutModel m;
  m.beta_ii = get_or(pt, "beta_ii", m.beta_ii);
  m.beta_zi = get_or(pt, "beta_zi", m.beta_zi);
  m.beta_iz = get_or(pt, "beta_iz", m.beta_iz);
  m.beta_zz = get_or(pt, "beta_zz", m.beta_zz);
  m.shot_count = get_or(pt, "shots", m.shot_count);
  m.multinomial = get_flag(pt, "multinomial", m.multinomial);
  try {
    m.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kConfigError, std::string("readout: ") + e.what());
  }
  return m;
}

// Amplitudes are stored as Rabi rates in MHz (value / 2 pi).
inline std::string calibration_to_ini(const MapCalibration& c) {
  std::ostringstream o;
  o << "t_g_ns = " << fmt_num(c.t_g) << "\n"
    << "stark_frequency_ghz = " << fmt_num(c.stark.frequency) << "\n"
    << "stark_amplitude_mhz = " << fmt_num(to_mhz(c.stark.amplitude)) << "\n"
    << "stark_rise_fall_ns = " << fmt_num(c.stark.rise_fall) << "\n"
    << "delta_eps_mhz = " << fmt_num(c.delta_eps) << "\n"
    << "delta_eps_prime_mhz = " << fmt_num(c.delta_eps_prime) << "\n"
    << "phi_rad = " << fmt_num(c.phi) << "\n"
    << "phi_prime_rad = " << fmt_num(c.phi_prime) << "\n"
    << "delta1_mhz = " << fmt_num(c.delta1) << "\n"
    << "delta2_mhz = " << fmt_num(c.delta2) << "\n"
    << "closing_phase_rad = " << fmt_num(c.closing_phase) << "\n"
    << "z_pulse_length_ns = " << fmt_num(c.z_pulse_length) << "\n";
  return o.str();
}

inline MapCalibration calibration_from_ptree(const Ptree& pt) {
  MapCalibration c;
  auto need = [&](const std::string& key) {
    const auto v = pt.get_optional<double>(key);
    if (!v) fail(ErrorCode::kConfigError, "calibration key missing or not a number: " + key);
    return *v;
  };
  c.t_g = need("t_g_ns");
  c.stark.frequency = need("stark_frequency_ghz");
  c.stark.amplitude = mhz(need("stark_amplitude_mhz"));
  c.stark.rise_fall = need("stark_rise_fall_ns");
  c.stark.duration = c.t_g;
  c.delta_eps = need("delta_eps_mhz");
  c.delta_eps_prime = need("delta_eps_prime_mhz");
  c.phi = need("phi_rad");
  c.phi_prime = need("phi_prime_rad");
  c.delta1 = need("delta1_mhz");
  c.delta2 = need("delta2_mhz");
  c.closing_phase = need("closing_phase_rad");
  c.z_pulse_length = need("z_pulse_length_ns");
  try {
    c.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kConfigError, std::string("calibration: ") + e.what());
  }
  return c;
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : cols_(header.size()) { line(header); }
  Csv& row(const std::vector<double>& v) {
    std::vector<std::string> s;
    for (double x : v) s.push_back(fmt_num(x));
    return line(s);
  }
  Csv& line(const std::vector<std::string>& v) {
    if (v.size() != cols_) fail(ErrorCode::kInvalidArgument, "csv row width mismatch");
    for (size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << v[i];
    out_ << "\n";
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  size_t cols_;
  std::ostringstream out_;
};

inline Json matrix_json(const Mat& m) {
  Json re = Json::array(), im = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json r = Json::array(), c = Json::array();
    for (int j = 0; j < m.cols(); ++j) {
      r.push_back(m(i, j).real());
      c.push_back(m(i, j).imag());
    }
    re.push_back(r);
    im.push_back(c);
  }
  return Json{{"real", re}, {"imag", im}};
}

inline Json real_matrix_json(const RMat& m) {
  Json out = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    out.push_back(r);
  }
  return out;
}

inline Json channel_json(const GateChannel& g) {
  Json j;
  j["kind"] = g.kind == GateChannel::Kind::kUnitary ? "unitary" : "superoperator";
  j["matrix"] = matrix_json(g.kind == GateChannel::Kind::kUnitary ? g.unitary : g.superop);
  j["duration_ns"] = g.duration;
  j["leakage"] = {g.leakage[0], g.leakage[1], g.leakage[2], g.leakage[3]};
  return j;
}

inline Json ptm_json(const Ptm& r, const Ptm& ideal, const std::string& ideal_name) {
  Json j;
  j["r"] = real_matrix_json(r);
  j["order"] = "row-major, Pauli index 4a+b with a the first qubit";
  j["ideal"] = ideal_name;
  j["fidelity"] = process_fidelity(r, ideal);
  j["choi_min_eigenvalue"] = choi_min_eigenvalue(r);
  double tp = 0;
  for (int k = 0; k < 16; ++k) tp = std::max(tp, std::abs(r(0, k) - (k == 0 ? 1.0 : 0.0)));
  j["tp_residual"] = tp;
  return j;
}

inline std::string record_csv(const MeasurementRecord& rec) {
  Csv c({"prep_index", "prepulse_index", "value", "shots"});
  for (size_t k = 0; k < rec.settings.size(); ++k) {
    c.line({std::to_string(rec.settings[k].first), std::to_string(rec.settings[k].second), fmt_num(rec.values[k]),
            std::to_string(rec.shots)});
  }
  return c.str();
}

inline std::string density_csv(const Mat& rho) {
  Csv c({"row", "col", "real", "imag"});
  for (int i = 0; i < rho.rows(); ++i) {
    for (int j = 0; j < rho.cols(); ++j) c.row({double(i), double(j), rho(i, j).real(), rho(i, j).imag()});
  }
  return c.str();
}

// Output directory that refuses paths escaping it and remembers what was written.
class OutputDir {
 public:
  explicit OutputDir(const fs::path& root) {
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) fail(ErrorCode::kIoError, "cannot create output directory " + root.string());
    root_ = fs::weakly_canonical(root);
  }
  const fs::path& root() const { return root_; }
  void write(const std::string& name, const std::string& content) {
    const fs::path rel(name);
    if (rel.empty() || rel.is_absolute() || rel.has_parent_path() || name == "." || name == "..") {
      fail(ErrorCode::kIoError, "output name must be a plain file name: " + name);
    }
    const fs::path full = root_ / rel;
    std::ofstream out(full, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) fail(ErrorCode::kIoError, "cannot write " + full.string());
    files_.push_back({name, content.size()});
  }
  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }
  const std::vector<std::pair<std::string, size_t>>& files() const { return files_; }

 private:
  fs::path root_;
  std::vector<std::pair<std::string, size_t>> files_;
};

}  // namespace mapcnot

#endif  // MAPCNOT_IO_HPP_
