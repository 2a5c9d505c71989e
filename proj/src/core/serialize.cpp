#include "core/serialize.hpp"

#include <cstring>
#include <fstream>

#include "core/check.hpp"

namespace graphae {

namespace {

constexpr char kMagic[8] = {'G', 'A', 'E', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    GA_CHECK(bool(is), "ArrayFile: truncated file");
    return v;
}

}  // namespace

void ArrayFile::put(const std::string& name, std::vector<int64_t> shape,
                    std::vector<float> data) {
    int64_t n = 1;
    for (int64_t d : shape) n *= d;
    GA_CHECK(n == int64_t(data.size()), "ArrayFile::put: shape/data mismatch for " + name);
    arrays[name] = {std::move(shape), std::move(data)};
}

const std::vector<float>& ArrayFile::get(const std::string& name,
                                         std::vector<int64_t>* shape) const {
    auto it = arrays.find(name);
    GA_CHECK(it != arrays.end(), "ArrayFile::get: missing array " + name);
    if (shape) *shape = it->second.first;
    return it->second.second;
}

void ArrayFile::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    GA_CHECK(bool(os), "ArrayFile: cannot open " + path + " for writing");
    os.write(kMagic, sizeof(kMagic));
    write_pod<uint32_t>(os, uint32_t(meta.size()));
    os.write(meta.data(), std::streamsize(meta.size()));
    write_pod<uint32_t>(os, uint32_t(arrays.size()));
    for (const auto& [name, entry] : arrays) {
        write_pod<uint32_t>(os, uint32_t(name.size()));
        os.write(name.data(), std::streamsize(name.size()));
        write_pod<uint32_t>(os, uint32_t(entry.first.size()));
        for (int64_t d : entry.first) write_pod<int64_t>(os, d);
        os.write(reinterpret_cast<const char*>(entry.second.data()),
                 std::streamsize(entry.second.size() * sizeof(float)));
    }
    GA_CHECK(bool(os), "ArrayFile: write failed for " + path);
}

ArrayFile ArrayFile::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    GA_CHECK(bool(is), "ArrayFile: cannot open " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    GA_CHECK(bool(is) && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0,
             "ArrayFile: bad magic in " + path);
    ArrayFile f;
    const auto meta_len = read_pod<uint32_t>(is);
    f.meta.resize(meta_len);
    is.read(f.meta.data(), std::streamsize(meta_len));
    const auto count = read_pod<uint32_t>(is);
    for (uint32_t k = 0; k < count; ++k) {
        const auto name_len = read_pod<uint32_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), std::streamsize(name_len));
        const auto ndim = read_pod<uint32_t>(is);
        std::vector<int64_t> shape(ndim);
        int64_t n = 1;
        for (uint32_t d = 0; d < ndim; ++d) {
            shape[d] = read_pod<int64_t>(is);
            n *= shape[d];
        }
        GA_CHECK(n >= 0, "ArrayFile: negative array size");
        std::vector<float> data(static_cast<size_t>(n));
        is.read(reinterpret_cast<char*>(data.data()),
                std::streamsize(data.size() * sizeof(float)));
        GA_CHECK(bool(is), "ArrayFile: truncated array " + name);
        f.arrays[name] = {std::move(shape), std::move(data)};
    }
    return f;
}

}  // namespace graphae
