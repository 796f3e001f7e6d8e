#include "lsmimo/config_io.hpp"

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "lsmimo/errors.hpp"

namespace lsmimo {
namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{"M",     "K",           "rho", "p_max", "eta",
                                          "eta_per_ue", "gamma", "J",   "seed",  "cell_radius",
                                          "d0",    "ple",         "distances"};
  return keys;
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw InputError("config key '" + key + "' has an invalid value");
  }
}

std::vector<double> sequence(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) throw InputError("config key '" + key + "' must be a list");
  std::vector<double> out;
  for (const auto& item : node) out.push_back(scalar<double>(item, key));
  return out;
}

}  // namespace

double parse_rho(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  bool db = false;
  if (s.size() > 2) {
    std::string tail = s.substr(s.size() - 2);
    for (auto& c : tail) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (tail == "db") {
      db = true;
      s.resize(s.size() - 2);
    }
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InputError("cannot parse rho from '" + text + "'");
  }
  if (used != s.size()) throw InputError("cannot parse rho from '" + text + "'");
  return db ? std::pow(10.0, v / 10.0) : v;
}

SystemConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw InputError(std::string("config is not valid YAML: ") + e.what());
  }
  SystemConfig c;
  if (root.IsNull()) {
    c.validate();
    return c;
  }
  if (!root.IsMap()) throw InputError("config must be a key-value mapping");

  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!known_keys().count(key)) throw InputError("unknown config key '" + key + "'");
    const YAML::Node& v = kv.second;
    if (key == "M") c.M = scalar<int>(v, key);
    else if (key == "K") c.K = scalar<int>(v, key);
    else if (key == "rho") c.rho = parse_rho(scalar<std::string>(v, key));
    else if (key == "p_max") c.p_max = scalar<double>(v, key);
    else if (key == "eta") c.eta = scalar<double>(v, key);
    else if (key == "eta_per_ue") c.eta_per_ue = sequence(v, key);
    else if (key == "gamma") c.gamma = sequence(v, key);
    else if (key == "J") c.J = scalar<int>(v, key);
    else if (key == "seed") c.seed = scalar<std::uint64_t>(v, key);
    else if (key == "cell_radius") c.cell_radius = scalar<double>(v, key);
    else if (key == "d0") c.d0 = scalar<double>(v, key);
    else if (key == "ple") c.ple = scalar<double>(v, key);
    else if (key == "distances") c.distances = sequence(v, key);
  }
  c.validate();
  return c;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const SystemConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "M" << YAML::Value << c.M;
  out << YAML::Key << "K" << YAML::Value << c.K;
  out << YAML::Key << "rho" << YAML::Value << c.rho;
  out << YAML::Key << "p_max" << YAML::Value << c.p_max;
  out << YAML::Key << "eta" << YAML::Value << c.eta;
  if (!c.eta_per_ue.empty()) out << YAML::Key << "eta_per_ue" << YAML::Value << YAML::Flow << c.eta_per_ue;
  if (!c.gamma.empty()) out << YAML::Key << "gamma" << YAML::Value << YAML::Flow << c.gamma;
  out << YAML::Key << "J" << YAML::Value << c.J;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "cell_radius" << YAML::Value << c.cell_radius;
  out << YAML::Key << "d0" << YAML::Value << c.d0;
  out << YAML::Key << "ple" << YAML::Value << c.ple;
  if (!c.distances.empty()) out << YAML::Key << "distances" << YAML::Value << YAML::Flow << c.distances;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace lsmimo
