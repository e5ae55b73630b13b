#ifndef FLOWPLAN_CLI_HPP
#define FLOWPLAN_CLI_HPP

namespace flowplan {

// Full command-line front end. Returns the process exit code:
// 0 success, 1 validation failure, 2 certificate violation, 3 I/O failure.
int run_cli(int argc, const char* const* argv);

}  // namespace flowplan

#endif  // FLOWPLAN_CLI_HPP
