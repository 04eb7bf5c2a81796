#include "sgst/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "sgst/rng.hpp"

namespace sgst {

double grad_check(const std::function<NodePtr<double>(const std::vector<NodePtr<double>>&)>& f,
                  std::vector<Tensor<double>> inputs, double epsilon, int max_coords_per_input,
                  uint64_t coord_seed) {
    // Analytic gradients at the base point.
    std::vector<NodePtr<double>> leaves;
    leaves.reserve(inputs.size());
    for (auto& t : inputs) leaves.push_back(make_leaf<double>(t, true));
    NodePtr<double> root = f(leaves);
    if (!std::isfinite(root->value[0])) throw NumericError("grad_check: function value is not finite");
    backward(root);

    auto eval_at = [&](const std::vector<Tensor<double>>& pts) {
        std::vector<NodePtr<double>> ls;
        ls.reserve(pts.size());
        for (const auto& t : pts) ls.push_back(make_leaf<double>(t, false));
        NodePtr<double> r = f(ls);
        if (!std::isfinite(r->value[0])) throw NumericError("grad_check: function value is not finite");
        return r->value[0];
    };

    Rng rng(coord_seed ^ 0x5eedULL);
    double worst = 0.0;
    for (size_t which = 0; which < inputs.size(); ++which) {
        const int64_t n = inputs[which].numel();
        std::vector<int64_t> coords;
        if (max_coords_per_input > 0 && n > max_coords_per_input) {
            coords.reserve(static_cast<size_t>(max_coords_per_input));
            for (int i = 0; i < max_coords_per_input; ++i)
                coords.push_back(rng.next_uint(static_cast<uint32_t>(n)));
            std::sort(coords.begin(), coords.end());
            coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
        } else {
            coords.resize(static_cast<size_t>(n));
            for (int64_t i = 0; i < n; ++i) coords[static_cast<size_t>(i)] = i;
        }
        for (int64_t c : coords) {
            const double saved = inputs[which][c];
            inputs[which][c] = saved + epsilon;
            const double fp = eval_at(inputs);
            inputs[which][c] = saved - epsilon;
            const double fm = eval_at(inputs);
            inputs[which][c] = saved;
            const double g_fd = (fp - fm) / (2.0 * epsilon);
            const double g_ad = leaves[which]->grad.numel() ? leaves[which]->grad[c] : 0.0;
            const double rel = std::abs(g_ad - g_fd) / std::max(1e-8, std::abs(g_ad) + std::abs(g_fd));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace sgst
