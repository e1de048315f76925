// Plan on a decodable combination lock and compare against the exact optimum.
#include <cstdio>

#include <lmdp/lmdp.hpp>

int main() {
    using namespace lmdp;
    const double epsilon = 0.05;
    Lmdp M = comb_lock_decodable(4, 3, 2, std::vector<int>{1, 0});

    auto W = choose_window(M, epsilon);
    if (!W) {
        std::puts("no certified window");
        return 1;
    }
    auto P = plan(M, *W);
    const double v = value(M, *P.to_policy());
    const double opt = brute_force_optimal(M).value;

    std::printf("S=%d A=%d H=%d L=%d\n", M.S(), M.A(), M.H(), M.L());
    std::printf("window W=%d for epsilon=%.2f\n", *W, epsilon);
    std::printf("certificate %.6f  realised %.6f  optimum %.6f\n", P.certificate, v, opt);
    std::printf("decoding error at W: %.3g\n", decoding_error_exact(M, *P.to_policy(), *W));
    return 0;
}
