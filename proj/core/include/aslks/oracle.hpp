#pragma once

#include "aslks/asc.hpp"
#include "aslks/conv.hpp"
#include "aslks/metrics.hpp"

// Reference implementations used only to check the main operators. Nothing
// here may call into the paths it verifies; the transcriptions keep their
// own index arithmetic and interpolation.
namespace aslks::oracle {

// Plain six-deep-loop grouped cross-correlation.
template <typename T>
Tensor4<T> naive_conv2d(const Tensor4<T>& x, const ConvParams<T>& p);

// Direct transcription of the grouped deformable sum with inline 4-corner
// interpolation.
template <typename T>
Tensor4<T> naive_asc_forward(const Tensor4<T>& x, const AscParams<T>& p,
                             const AscFields<T>& fields);

// Recomputes precision/recall from scratch at every confidence prefix and
// integrates the envelope by quadratic scan.
double exhaustive_average_precision(std::span<const Detection> dets,
                                    std::span<const GroundTruth> gts,
                                    int class_id);

}  // namespace aslks::oracle
