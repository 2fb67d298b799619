#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "aslks/asc.hpp"
#include "aslks/c2f.hpp"
#include "aslks/lksc.hpp"
#include "aslks/metrics.hpp"

namespace aslks {

// --- binary tensor container ------------------------------------------------
// Layout (little-endian): magic "T4", u8 dtype tag (0 = f32, 1 = f64),
// u32 n, c, h, w, then n*c*h*w scalars.

template <typename T>
void save_tensor(std::ostream& out, const Tensor4<T>& t);

using AnyTensor = std::variant<Tensor4<float>, Tensor4<double>>;
AnyTensor load_tensor(std::istream& in);

template <typename T>
Tensor4<T> load_tensor_as(std::istream& in);  // ParseError on dtype mismatch

// Multi-tensor pack: magic "T4PK", u32 count, then repeated
// [u32 name length, name bytes, tensor record].
template <typename T>
void save_tensor_pack(
    const std::string& path,
    const std::vector<std::pair<std::string, const Tensor4<T>*>>& entries);

template <typename T>
std::map<std::string, Tensor4<T>> load_tensor_pack(const std::string& path);

// --- ASC parameter container -------------------------------------------------
// Magic "ASCP", u32 version, spec integers, generator spec integers, then
// named tensors (base weights, generator weights/bias, bn arrays).

template <typename T>
void save_asc_params(const std::string& path, const AscParams<T>& p);

template <typename T>
AscParams<T> load_asc_params(const std::string& path);

// --- LKSC plan ---------------------------------------------------------------
// JSON document holding the spec integers, per-branch anchors and tile shift
// tables, and tensor names resolving into a binary pack written next to it.

template <typename T>
void save_lksc_plan(const std::string& json_path,
                    const std::string& container_path, const LkscPlan<T>& p);

template <typename T>
LkscPlan<T> load_lksc_plan(const std::string& json_path);

// --- block-stack configuration ------------------------------------------------
// JSON array of {variant, c_in, c_out, c_prime, n, kernel, tile,
// faithful_eq6}; unknown fields rejected, errors name the record and field.

std::vector<C2fConfig> load_block_stack(const std::string& path);
std::vector<C2fConfig> parse_block_stack(const std::string& text);

// --- detection / ground-truth files -------------------------------------------
// Detections: [{image_id, class_id, box:[x1,y1,x2,y2], confidence}]
// Ground truth: [{image_id, class_id, box:[x1,y1,x2,y2]}]

std::vector<Detection> load_detections(const std::string& path);
std::vector<GroundTruth> load_ground_truth(const std::string& path);

// --- report serialization ------------------------------------------------------

std::string cost_report_json(Shape4 input, const CostReport& configured,
                             const CostReport& baseline,
                             const CostReport& dense);
std::string cost_report_csv(const CostReport& configured,
                            const CostReport& baseline,
                            const CostReport& dense);

// Fixed 4-decimal formatting, per the metrics output contract.
std::string ap_result_json(const ApResult& r);

}  // namespace aslks
