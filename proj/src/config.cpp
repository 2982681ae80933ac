#include "demandirl/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "demandirl/errors.hpp"

namespace demandirl {

namespace {

const char* const kKeys[] = {"mu",   "beta", "gamma",   "eta",   "kappa",
                             "mu0",  "beta0", "gamma0", "eta0",  "nu0_bar",
                             "fee",  "quota", "price",  "cycle_days"};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct Entry {
  double value;
  std::size_t line_no;
};

}  // namespace

ModelConfig parse_model_config(std::istream& in, const std::string& name) {
  std::map<std::string, Entry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw DataError(name + " line " + std::to_string(line_no) +
                      ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    bool known = false;
    for (const char* k : kKeys) {
      if (key == k) { known = true; break; }
    }
    if (!known) {
      throw DataError(name + " line " + std::to_string(line_no) +
                      ": unknown key '" + key + "'");
    }
    if (entries.count(key)) {
      throw DataError(name + " line " + std::to_string(line_no) +
                      ": duplicate key '" + key + "' (first set on line " +
                      std::to_string(entries[key].line_no) + ")");
    }
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(val.c_str(), &end);
    if (val.empty() || end != val.c_str() + val.size()) {
      throw DataError(name + " line " + std::to_string(line_no) +
                      ": value for '" + key + "' must be a number, got '" +
                      val + "'");
    }
    entries[key] = {v, line_no};
  }

  std::vector<std::string> missing;
  for (const char* k : kKeys) {
    if (!entries.count(k)) missing.push_back(k);
  }
  if (!missing.empty()) {
    std::string msg = name + ": missing required keys:";
    for (const std::string& k : missing) msg += " " + k;
    throw DataError(msg);
  }

  auto get = [&](const char* k) { return entries[k].value; };
  ModelConfig cfg;
  cfg.reward.mu = get("mu");
  cfg.reward.beta = get("beta");
  cfg.reward.gamma = get("gamma");
  cfg.reward.eta = get("eta");
  cfg.reward.kappa = get("kappa");
  cfg.prior.mu0 = get("mu0");
  cfg.prior.beta0 = get("beta0");
  cfg.prior.gamma0 = get("gamma0");
  cfg.prior.eta0 = get("eta0");
  cfg.prior.nu0_bar = get("nu0_bar");
  cfg.plan.fee = get("fee");
  cfg.plan.quota = get("quota");
  cfg.plan.price = get("price");
  double cd = get("cycle_days");
  if (!(cd >= 1.0) || cd != std::floor(cd) || cd > 1000000.0) {
    throw DataError(name + ": cycle_days must be a positive integer");
  }
  cfg.plan.cycle_days = static_cast<int>(cd);

  try {
    cfg.reward.validate();
    cfg.prior.validate();
    cfg.plan.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(name + ": " + e.what());
  }
  return cfg;
}

ModelConfig load_model_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  return parse_model_config(in, path);
}

}  // namespace demandirl
