#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace graphae {

// flat named-array container used for checkpoints: a JSON metadata string
// plus float32 arrays with shapes, written little-endian
struct ArrayFile {
    std::string meta;  // free-form JSON
    std::map<std::string, std::pair<std::vector<int64_t>, std::vector<float>>> arrays;

    void put(const std::string& name, std::vector<int64_t> shape,
             std::vector<float> data);
    const std::vector<float>& get(const std::string& name,
                                  std::vector<int64_t>* shape = nullptr) const;
    bool has(const std::string& name) const { return arrays.count(name) != 0; }

    void save(const std::string& path) const;
    static ArrayFile load(const std::string& path);
};

}  // namespace graphae
