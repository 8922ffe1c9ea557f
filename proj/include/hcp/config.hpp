#pragma once

#include <map>
#include <string>
#include <vector>

#include "hcp/errors.hpp"

namespace hcp {

// Flat key=value settings file: one pair per line, '#' starts a comment,
// blank lines ignored. Keys are namespaced with dots (e.g. ift.epochs).
class Config {
 public:
  Config() = default;
  static Config from_file(const std::string& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key, const std::string& def) const;
  int get_int(const std::string& key, int def) const;
  long long get_ll(const std::string& key, long long def) const;
  double get_double(const std::string& key, double def) const;
  uint64_t get_u64(const std::string& key, uint64_t def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<double> get_doubles(const std::string& key,
                                  std::vector<double> def) const;  // comma list

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace hcp
