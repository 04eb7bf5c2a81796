#pragma once

#include "sgst/image.hpp"

namespace sgst {

// Dense displacement field between two frames, pixels/frame.
struct FlowField {
    Image<float> u;  // horizontal
    Image<float> v;  // vertical
};

struct FlowParams {
    double alpha = 15.0;  // smoothness weight
    int iters = 100;
};

// Horn-Schunck fixed-point iteration on single-band float frames. Derivative
// estimates and the neighbour average follow the original scheme, so two
// identical frames yield exactly zero flow.
FlowField compute_flow_horn_schunck(const ImageF& a, const ImageF& b, const FlowParams& params = {});

// Brightness-constancy plus smoothness energy of a candidate field; the
// iteration drives this downward on well-posed inputs.
double horn_schunck_energy(const ImageF& a, const ImageF& b, const FlowField& flow, double alpha);

}  // namespace sgst
