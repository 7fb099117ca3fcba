#include <cstdio>
#include <cstdlib>
#include <string>

#include "dwitt/acceptance.hpp"

int main(int argc, char** argv)
{
    using namespace dwitt::acceptance;
    Options o;
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--seed" && i + 1 < argc)
            o.seed = static_cast<unsigned>(std::stoul(argv[++i]));
        else if (a == "--only" && i + 1 < argc)
            only = std::stoi(argv[++i]);
        else {
            std::fprintf(stderr, "usage: %s [--seed N] [--only K]\n", argv[0]);
            return 2;
        }
    }
    int failed = 0;
    for (int id = 1; id <= criterion_count; ++id) {
        if (only && id != only)
            continue;
        Criterion c = run_criterion(id, o);
        std::printf("%s\n", c.line().c_str());
        std::fflush(stdout);
        failed += !c.pass;
    }
    std::printf("%s: %d failed\n", failed ? "FAIL" : "PASS", failed);
    return failed ? 1 : 0;
}
