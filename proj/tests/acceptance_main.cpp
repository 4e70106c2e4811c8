// Verification suite driver: one line per criterion, exit code = number of
// failed criteria. `--quick` shrinks horizons for smoke testing.

#include <cstdio>
#include <cstring>

#include "duffinglab/acceptance.hpp"

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--quick") == 0) quick = true;

    const int failures =
        duffing::acceptance::run_all(quick, [](const duffing::acceptance::CriterionResult& r) {
            std::printf("[%s] %2d %-38s %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                        r.detail.c_str());
            std::fflush(stdout);
        });
    std::printf("%d of 12 criteria failed%s\n", failures, quick ? " (quick mode)" : "");
    return failures;
}
