#ifndef SSLAB_APP_CLI_HPP
#define SSLAB_APP_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace sslab::app {

enum ExitCode { ok = 0, config_error = 1, numerical_error = 2, partial = 3 };

/// Entry point of the command-line tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sslab::app

#endif
