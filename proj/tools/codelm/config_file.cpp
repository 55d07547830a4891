// SPDX-License-Identifier: Apache-2.0

#include "config_file.hpp"

#include <sstream>

#include "codelm/corpus.hpp"
#include "codelm/error.hpp"

namespace codelm::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> read_config_args(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> args;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? std::string() : trim(line.substr(0, eq));
    if (key.empty()) {
      throw InputError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

std::vector<std::string> expand_config(const std::vector<std::string>& argv) {
  std::vector<std::string> out;
  std::vector<std::string> injected;
  std::size_t subcommand_end = 0;
  for (std::size_t k = 0; k < argv.size(); ++k) {
    const auto& a = argv[k];
    if (k == 1) subcommand_end = 2;
    if (a == "--config" && k + 1 < argv.size()) {
      const auto extra = read_config_args(argv[k + 1]);
      injected.insert(injected.end(), extra.begin(), extra.end());
      ++k;
      continue;
    }
    if (a.rfind("--config=", 0) == 0) {
      const auto extra = read_config_args(a.substr(9));
      injected.insert(injected.end(), extra.begin(), extra.end());
      continue;
    }
    out.push_back(a);
  }
  if (injected.empty()) return out;
  const auto at = std::min(subcommand_end, out.size());
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(at), injected.begin(), injected.end());
  return out;
}

}  // namespace codelm::cli
