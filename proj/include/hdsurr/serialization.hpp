#pragma once

#include "hdsurr/kernel_surrogate.hpp"
#include "hdsurr/neural_surrogate.hpp"
#include "hdsurr/tensor_train.hpp"

#include <iosfwd>
#include <string>

namespace hdsurr {

/// Binary record (little-endian, see docs/format.md). Round-trips bit-exactly.
void write_ftt_binary(std::ostream& out, const FunctionalTT& surrogate);
FunctionalTT read_ftt_binary(std::istream& in);

/// JSON text with the same fields. Doubles are printed with 17 significant
/// digits, so the round trip is exact as well.
std::string ftt_to_json(const FunctionalTT& surrogate);
FunctionalTT ftt_from_json(const std::string& text);

void save_ftt(const std::string& path, const FunctionalTT& surrogate);
FunctionalTT load_ftt(const std::string& path);

/// Kernel surrogates share the container (kind 2).
void write_kernel_binary(std::ostream& out, const KernelSurrogate& surrogate);
KernelSurrogate read_kernel_binary(std::istream& in);
std::string kernel_to_json(const KernelSurrogate& surrogate);
KernelSurrogate kernel_from_json(const std::string& text);
void save_kernel(const std::string& path, const KernelSurrogate& surrogate);
KernelSurrogate load_kernel(const std::string& path);

/// Networks: kind 3.
void write_mlp_binary(std::ostream& out, const NeuralSurrogate& surrogate);
NeuralSurrogate read_mlp_binary(std::istream& in);
void save_mlp(const std::string& path, const NeuralSurrogate& surrogate);
NeuralSurrogate load_mlp(const std::string& path);

}  // namespace hdsurr
