#include "harness/checkpoint.hpp"

#include "core/check.hpp"

namespace graphae {

template <typename S>
void params_to_arrays(const nn::ParamStore<S>& store, ArrayFile& af) {
    for (const auto& [name, t] : store.params) {
        std::vector<int64_t> shape(t.shape().begin(), t.shape().end());
        std::vector<float> data(t.values().begin(), t.values().end());
        af.put(name, std::move(shape), std::move(data));
    }
    for (const auto& [name, v] : store.buffers) {
        std::vector<float> data(v->begin(), v->end());
        af.put(name, {int64_t(v->size())}, std::move(data));
    }
}

template <typename S>
void params_from_arrays(nn::ParamStore<S>& store, const ArrayFile& af) {
    for (auto& [name, t] : store.params) {
        const auto& data = af.get(name);
        GA_CHECK(int64_t(data.size()) == t.numel(),
                 "checkpoint: size mismatch for " + name);
        for (size_t i = 0; i < data.size(); ++i) t.data()[i] = S(data[i]);
    }
    for (auto& [name, v] : store.buffers) {
        const auto& data = af.get(name);
        GA_CHECK(data.size() == v->size(), "checkpoint: size mismatch for " + name);
        for (size_t i = 0; i < data.size(); ++i) (*v)[i] = S(data[i]);
    }
}

template <typename S>
void save_checkpoint(const nn::ParamStore<S>& store, const std::string& meta_json,
                     const std::string& path) {
    ArrayFile af;
    af.meta = meta_json;
    params_to_arrays(store, af);
    af.save(path);
}

template <typename S>
std::string load_checkpoint(nn::ParamStore<S>& store, const std::string& path) {
    ArrayFile af = ArrayFile::load(path);
    params_from_arrays(store, af);
    return af.meta;
}

template void params_to_arrays<float>(const nn::ParamStore<float>&, ArrayFile&);
template void params_to_arrays<double>(const nn::ParamStore<double>&, ArrayFile&);
template void params_from_arrays<float>(nn::ParamStore<float>&, const ArrayFile&);
template void params_from_arrays<double>(nn::ParamStore<double>&, const ArrayFile&);
template void save_checkpoint<float>(const nn::ParamStore<float>&, const std::string&,
                                     const std::string&);
template void save_checkpoint<double>(const nn::ParamStore<double>&, const std::string&,
                                      const std::string&);
template std::string load_checkpoint<float>(nn::ParamStore<float>&, const std::string&);
template std::string load_checkpoint<double>(nn::ParamStore<double>&,
                                             const std::string&);

}  // namespace graphae
