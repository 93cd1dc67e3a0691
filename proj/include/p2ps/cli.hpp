#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace p2ps {

// Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or usage.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// A sweep axis "key=v1,v2,..." or "key=lo..hi" (integers, step 1).
struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};
SweepAxis parse_axis(const std::string& text);

}  // namespace p2ps
