// Certificate walkthrough: the family encoding passes with its derived
// coefficients and fails (with an exact counterexample) after perturbing one
// of them; a random unlifted candidate never proves full consensus.

#include <iostream>

#include "opsplit/certificate.hpp"

using namespace opsplit;

int main() {
    const Rational alpha = rat(1), beta = rat(1, 2);
    auto thetas = family_step_thetas(alpha, beta, rat(1), rat(1, 3));

    auto good = build_family_system(alpha, beta, thetas);
    std::cout << report_to_text(verify_encoding(good, family_targets()), good) << '\n';

    auto bad_thetas = thetas;
    bad_thetas[3] += rat(7);
    auto bad = build_family_system(alpha, beta, bad_thetas);
    std::cout << report_to_text(verify_encoding(bad, family_targets()), bad) << '\n';

    SplitMix64 rng(7);
    auto candidate = random_nolifting_candidate(2, rng);
    std::cout << probe_to_text(impossibility_probe(candidate));
    return 0;
}
