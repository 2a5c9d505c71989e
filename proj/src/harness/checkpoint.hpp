#pragma once

#include <string>

#include "core/nn.hpp"
#include "core/serialize.hpp"

namespace graphae {

// copy every registered parameter and persistent buffer into the flat
// float32 array container (and back); names must match exactly on load
template <typename S>
void params_to_arrays(const nn::ParamStore<S>& store, ArrayFile& af);
template <typename S>
void params_from_arrays(nn::ParamStore<S>& store, const ArrayFile& af);

template <typename S>
void save_checkpoint(const nn::ParamStore<S>& store, const std::string& meta_json,
                     const std::string& path);
// returns the stored metadata JSON
template <typename S>
std::string load_checkpoint(nn::ParamStore<S>& store, const std::string& path);

}  // namespace graphae
