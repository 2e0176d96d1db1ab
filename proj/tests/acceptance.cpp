// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
// Usage: perfplast_acceptance [--seed n] [criterion ids...]
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "perfplast/studies.hpp"

int main(int argc, char** argv) {
    std::uint64_t seed = 0;
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--seed" && i + 1 < argc) seed = std::strtoull(argv[++i], nullptr, 10);
        else only.push_back(std::atoi(a.c_str()));
    }
    bool ok = true;
    for (const auto& r : perfplast::run_acceptance(seed, only)) {
        std::printf("%s\n", perfplast::format_check(r).c_str());
        std::fflush(stdout);
        ok = ok && r.pass;
    }
    return ok ? 0 : 1;
}
