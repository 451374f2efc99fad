#include "toa/cir_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace toa {

namespace {

using nlohmann::json;

constexpr double kDegToRad = kPi / 180.0;

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const char* where) {
  for (const auto& item : obj.items()) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* k) { return item.key() == k; });
    if (!known)
      throw std::invalid_argument(std::string("CIR: unknown field '") + item.key() +
                                  "' in " + where);
  }
  for (const char* k : allowed)
    if (!obj.contains(k))
      throw std::invalid_argument(std::string("CIR: missing field '") + k + "' in " + where);
}

double number_field(const json& obj, const char* key, const char* where) {
  const json& v = obj.at(key);
  if (!v.is_number())
    throw std::invalid_argument(std::string("CIR: field '") + key + "' in " + where +
                                " must be a number");
  return v.get<double>();
}

int int_field(const json& obj, const char* key, const char* where) {
  const json& v = obj.at(key);
  if (!v.is_number_integer())
    throw std::invalid_argument(std::string("CIR: field '") + key + "' in " + where +
                                " must be an integer");
  return v.get<int>();
}

std::vector<Mpc> parse_paths(const json& arr, const char* where) {
  if (!arr.is_array())
    throw std::invalid_argument(std::string("CIR: ") + where + " must be an array");
  std::vector<Mpc> paths;
  paths.reserve(arr.size());
  for (const json& rec : arr) {
    if (!rec.is_object())
      throw std::invalid_argument(std::string("CIR: entries of ") + where + " must be objects");
    require_keys(rec, {"delay_s", "gain_re", "gain_im", "azimuth_deg", "elevation_deg"}, where);
    Mpc path;
    path.delay = number_field(rec, "delay_s", where);
    if (path.delay < 0.0)
      throw std::invalid_argument(std::string("CIR: negative delay in ") + where);
    path.gain = cplx(number_field(rec, "gain_re", where), number_field(rec, "gain_im", where));
    const double az = number_field(rec, "azimuth_deg", where);
    const double el = number_field(rec, "elevation_deg", where);
    if (std::abs(el) > 90.0)
      throw std::invalid_argument(std::string("CIR: elevation outside [-90, 90] in ") + where);
    path.azimuth = az * kDegToRad;
    path.elevation = el * kDegToRad;
    paths.push_back(path);
  }
  std::stable_sort(paths.begin(), paths.end(),
                   [](const Mpc& a, const Mpc& b) { return a.delay < b.delay; });
  return paths;
}

json path_to_json(const Mpc& path) {
  json rec;
  rec["delay_s"] = path.delay;
  rec["gain_re"] = path.gain.real();
  rec["gain_im"] = path.gain.imag();
  rec["azimuth_deg"] = path.azimuth / kDegToRad;
  rec["elevation_deg"] = path.elevation / kDegToRad;
  return rec;
}

}  // namespace

MultipathScenario load_cir(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CIR file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("CIR parse failure in ") + path + ": " + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("CIR: top-level document must be an object");
  require_keys(doc, {"carrier_hz", "array", "noise_variance_w", "sync_paths", "intf_paths"},
               "document");

  const double carrier = number_field(doc, "carrier_hz", "document");
  if (!(carrier > 0.0)) throw std::invalid_argument("CIR: carrier_hz must be positive");

  const json& arr = doc.at("array");
  if (!arr.is_object()) throw std::invalid_argument("CIR: array must be an object");
  require_keys(arr, {"rows", "cols", "spacing_m"}, "array");

  MultipathScenario scenario;
  scenario.geometry.rows = int_field(arr, "rows", "array");
  scenario.geometry.cols = int_field(arr, "cols", "array");
  scenario.geometry.spacing = number_field(arr, "spacing_m", "array");
  scenario.geometry.wavelength = kSpeedOfLight / carrier;
  if (scenario.geometry.rows < 1 || scenario.geometry.cols < 1)
    throw std::invalid_argument("CIR: array dimensions must be positive");
  if (!(scenario.geometry.spacing > 0.0))
    throw std::invalid_argument("CIR: spacing_m must be positive");

  scenario.noise_variance = number_field(doc, "noise_variance_w", "document");
  scenario.sync_paths = parse_paths(doc.at("sync_paths"), "sync_paths");
  scenario.intf_paths = parse_paths(doc.at("intf_paths"), "intf_paths");
  scenario.validate();
  return scenario;
}

void write_cir(const std::string& path, const MultipathScenario& scenario) {
  scenario.validate();
  json doc;
  doc["carrier_hz"] = scenario.geometry.carrier_hz();
  doc["array"] = {{"rows", scenario.geometry.rows},
                  {"cols", scenario.geometry.cols},
                  {"spacing_m", scenario.geometry.spacing}};
  doc["noise_variance_w"] = scenario.noise_variance;
  doc["sync_paths"] = json::array();
  for (const Mpc& p : scenario.sync_paths) doc["sync_paths"].push_back(path_to_json(p));
  doc["intf_paths"] = json::array();
  for (const Mpc& p : scenario.intf_paths) doc["intf_paths"].push_back(path_to_json(p));

  std::ofstream out(path);
  if (!out) throw IoError("cannot open CIR file for writing: " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing CIR file: " + path);
}

}  // namespace toa
