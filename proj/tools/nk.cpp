#include <cstdio>
#include <string>

namespace {

int usage(std::FILE* out) {
    std::fputs(
        "usage: nk <verb> [options] [input]\n"
        "verbs: parse summary boundary invariants fundamentals curves sum\n"
        "       check-0eff decide reduce33\n",
        out);
    return out == stdout ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) return usage(stderr);
    std::string verb = argv[1];
    if (verb == "--help" || verb == "-h" || verb == "help") return usage(stdout);
    std::fprintf(stderr, "nk: verb '%s' not implemented yet\n", verb.c_str());
    return 2;
}
