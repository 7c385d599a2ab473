// Minimal usage example: find the common zero of three affine monotone maps
// with the two-fold-lifted three-operator method and check it by forward
// evaluation.

#include <iostream>

#include "opsplit/engine.hpp"
#include "opsplit/operators.hpp"
#include "opsplit/splittings.hpp"

using namespace opsplit;

int main() {
    // A(x) = x - (4,0), B(x) = 2x, C(x) = x + (1,1); the sum vanishes at
    // x = (3/4, -1/4).
    Matrix id2 = Matrix::identity(2);
    Matrix two(2, 2);
    two(0, 0) = two(1, 1) = 2.0;
    auto a = make_affine(id2, {-4.0, 0.0});
    auto b = make_affine(two, {0.0, 0.0});
    auto c = make_affine(id2, {1.0, 1.0});

    MethodConfig cfg;
    cfg.method = "ryu3";
    cfg.alpha = 1.0;
    cfg.theta = 0.5;
    Splitting sp = make_splitting(cfg, {a, b, c}, 2);

    IterationConfig it;
    it.fp_tol = 1e-12;
    IterateResult res = iterate(sp.step, sp.origin(), it);

    std::cout << "status: " << to_string(res.status) << " after " << res.iters << " iterations\n";
    std::cout << "solution: (" << res.solution[0] << ", " << res.solution[1] << ")\n";
    Vector sum = add(add(a->forward(res.solution), b->forward(res.solution)),
                     c->forward(res.solution));
    std::cout << "||A(x)+B(x)+C(x)|| = " << norm2(sum) << "\n";
    return 0;
}
