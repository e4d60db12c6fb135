#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lightcone/errors.hpp"
#include "lightcone/io.hpp"

namespace lightcone::io {

namespace {

constexpr char kMagic[8] = {'L', 'C', 'B', 'I', 'N', '\x01', '\0', '\0'};

std::size_t element_size(const std::string& dtype) {
    if (dtype == "f64" || dtype == "i64") return 8;
    if (dtype == "c128") return 16;
    throw FormatError("unknown dtype " + dtype);
}

template <class T>
Array pack(const std::string& dtype, std::vector<std::int64_t> shape, const T* data, std::size_t count) {
    Array a;
    a.dtype = dtype;
    a.shape = std::move(shape);
    a.bytes.resize(count * sizeof(T));
    if (count) std::memcpy(a.bytes.data(), data, a.bytes.size());
    return a;
}

const Array& lookup(const Container& c, const std::string& name, const std::string& dtype) {
    auto it = c.arrays.find(name);
    if (it == c.arrays.end()) throw FormatError("container has no array '" + name + "'");
    if (it->second.dtype != dtype) throw FormatError("array '" + name + "' has dtype " + it->second.dtype);
    return it->second;
}

}  // namespace

void Container::put(const std::string& name, const Mat& m) {
    arrays[name] = pack("f64", {m.rows(), m.cols()}, m.data(), static_cast<std::size_t>(m.size()));
}

void Container::put(const std::string& name, const CMat& m) {
    arrays[name] = pack("c128", {m.rows(), m.cols()}, m.data(), static_cast<std::size_t>(m.size()));
}

void Container::put(const std::string& name, const std::vector<std::int64_t>& v) {
    arrays[name] = pack("i64", {static_cast<std::int64_t>(v.size())}, v.data(), v.size());
}

Mat Container::get_real(const std::string& name) const {
    const Array& a = lookup(*this, name, "f64");
    if (a.shape.size() != 2) throw FormatError("array '" + name + "' is not two-dimensional");
    Mat m(a.shape[0], a.shape[1]);
    if (m.size()) std::memcpy(m.data(), a.bytes.data(), a.bytes.size());
    return m;
}

CMat Container::get_complex(const std::string& name) const {
    const Array& a = lookup(*this, name, "c128");
    if (a.shape.size() != 2) throw FormatError("array '" + name + "' is not two-dimensional");
    CMat m(a.shape[0], a.shape[1]);
    if (m.size()) std::memcpy(m.data(), a.bytes.data(), a.bytes.size());
    return m;
}

std::vector<std::int64_t> Container::get_index(const std::string& name) const {
    const Array& a = lookup(*this, name, "i64");
    std::vector<std::int64_t> v(a.bytes.size() / 8);
    if (!v.empty()) std::memcpy(v.data(), a.bytes.data(), a.bytes.size());
    return v;
}

void write_container(const std::string& path, const Container& c) {
    json header;
    header["kind"] = c.kind;
    header["meta"] = c.meta;
    header["endian"] = "little";
    json list = json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, a] : c.arrays) {
        list.push_back({{"name", name}, {"dtype", a.dtype}, {"shape", a.shape}, {"offset", offset},
                        {"bytes", a.bytes.size()}});
        offset += a.bytes.size();
    }
    header["arrays"] = list;
    const std::string text = header.dump();
    std::ostringstream out;
    out.write(kMagic, sizeof kMagic);
    const std::uint64_t len = text.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, a] : c.arrays)
        out.write(reinterpret_cast<const char*>(a.bytes.data()), static_cast<std::streamsize>(a.bytes.size()));
    write_text_atomic(path, out.str());
}

Container read_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw FormatError(path + ": bad magic");
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    if (!in) throw FormatError(path + ": truncated header");
    json header = json::parse(text);
    Container c;
    c.kind = header.at("kind").get<std::string>();
    c.meta = header.at("meta");
    const auto payload_start = in.tellg();
    for (const auto& entry : header.at("arrays")) {
        Array a;
        a.dtype = entry.at("dtype").get<std::string>();
        a.shape = entry.at("shape").get<std::vector<std::int64_t>>();
        const auto bytes = entry.at("bytes").get<std::uint64_t>();
        std::uint64_t count = 1;
        for (auto s : a.shape) count *= static_cast<std::uint64_t>(s);
        if (count * element_size(a.dtype) != bytes) throw FormatError(path + ": inconsistent array size");
        a.bytes.resize(bytes);
        in.seekg(payload_start + static_cast<std::streamoff>(entry.at("offset").get<std::uint64_t>()));
        in.read(reinterpret_cast<char*>(a.bytes.data()), static_cast<std::streamsize>(bytes));
        if (!in) throw FormatError(path + ": truncated payload");
        c.arrays[entry.at("name").get<std::string>()] = std::move(a);
    }
    return c;
}

void write_text_atomic(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw FormatError("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace lightcone::io
