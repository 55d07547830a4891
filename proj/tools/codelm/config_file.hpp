// SPDX-License-Identifier: Apache-2.0
//
// `key = value` config files, expanded into `--key=value` arguments that are
// placed before the real command-line flags so the flags win.

#pragma once

#include <string>
#include <vector>

namespace codelm::cli {

/// Parses a config file. Blank lines and lines starting with '#' are
/// skipped. Throws InputError on lines without '=' or with an empty key.
std::vector<std::string> read_config_args(const std::string& path);

/// Returns argv with the contents of any `--config FILE` (or
/// `--config=FILE`) spliced in directly after the subcommand name.
std::vector<std::string> expand_config(const std::vector<std::string>& argv);

}  // namespace codelm::cli
