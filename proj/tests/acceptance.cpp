// Acceptance run: one PASS/FAIL line per criterion. Optional arguments select
// criterion ids; exit status 1 when any selected criterion fails.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "criteria.hpp"

namespace crit = plheat::criteria;

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    char* end = nullptr;
    const long id = std::strtol(argv[i], &end, 10);
    if (*end != '\0' || id < 1 || id > crit::kCount) {
      std::fprintf(stderr, "acceptance: bad criterion id '%s'\n", argv[i]);
      return 2;
    }
    ids.push_back(static_cast<int>(id));
  }
  if (ids.empty()) {
    for (int id = 1; id <= crit::kCount; ++id) ids.push_back(id);
  }

  int failed = 0;
  for (int id : ids) {
    const crit::Outcome o = crit::run(id);
    std::printf("%s\n", crit::format(o).c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%zu criteria, %d failed\n", ids.size(), failed);
  return failed == 0 ? 0 : 1;
}
