#include "spectronet/siamese/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

namespace spectronet {

namespace {

constexpr const char* kMagic = "spectronet checkpoint v1";

std::size_t total_floats(SiameseModel<float>& m) {
    std::vector<std::vector<float>*> blobs;
    m.collect_blobs(blobs);
    std::size_t n = 0;
    for (const auto* b : blobs) n += b->size();
    return n;
}

} // namespace

void save_checkpoint(SiameseModel<float>& m, const CheckpointMeta& meta,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot write checkpoint '" + path + "'");
    const SiameseArch& a = m.arch();
    out << kMagic << '\n'
        << "depth " << a.depth << '\n'
        << "features " << a.features << '\n'
        << "kernel " << a.kernel << '\n'
        << "residual " << (a.residual ? 1 : 0) << '\n'
        << "n " << a.n << '\n'
        << "init " << meta.init_scheme << '\n'
        << "similarity " << similarity_name(meta.similarity) << '\n'
        << "param_floats " << total_floats(m) << '\n'
        << "data\n";
    std::vector<std::vector<float>*> blobs;
    m.collect_blobs(blobs);
    for (const auto* b : blobs) {
        out.write(reinterpret_cast<const char*>(b->data()),
                  static_cast<std::streamsize>(b->size() * sizeof(float)));
    }
    if (!out) throw CheckpointError("failed writing checkpoint '" + path + "'");
}

std::pair<SiameseModel<float>, CheckpointMeta>
load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kMagic) {
        throw CheckpointError("'" + path + "' is not a spectronet checkpoint");
    }
    std::map<std::string, std::string> fields;
    while (std::getline(in, line)) {
        if (line == "data") break;
        auto space = line.find(' ');
        if (space == std::string::npos) {
            throw CheckpointError("checkpoint '" + path +
                                  "': malformed header line '" + line + "'");
        }
        fields[line.substr(0, space)] = line.substr(space + 1);
    }
    auto get = [&](const char* key) -> const std::string& {
        auto it = fields.find(key);
        if (it == fields.end()) {
            throw CheckpointError("checkpoint '" + path +
                                  "': missing header field '" + key + "'");
        }
        return it->second;
    };
    CheckpointMeta meta;
    SiameseArch arch;
    arch.depth = std::stoul(get("depth"));
    arch.features = std::stoul(get("features"));
    arch.kernel = std::stoul(get("kernel"));
    arch.residual = get("residual") == "1";
    arch.n = std::stoul(get("n"));
    meta.arch = arch;
    meta.init_scheme = get("init");
    meta.similarity = similarity_from_name(get("similarity"));
    const std::size_t declared = std::stoul(get("param_floats"));

    SiameseModel<float> model(arch);
    if (total_floats(model) != declared) {
        throw CheckpointError(
            "checkpoint '" + path + "': declared parameter count " +
            std::to_string(declared) + " does not match architecture (" +
            std::to_string(total_floats(model)) + ")");
    }
    std::vector<std::vector<float>*> blobs;
    model.collect_blobs(blobs);
    for (auto* b : blobs) {
        in.read(reinterpret_cast<char*>(b->data()),
                static_cast<std::streamsize>(b->size() * sizeof(float)));
        if (in.gcount() !=
            static_cast<std::streamsize>(b->size() * sizeof(float))) {
            throw CheckpointError("checkpoint '" + path +
                                  "': truncated parameter data");
        }
    }
    char extra;
    if (in.read(&extra, 1)) {
        throw CheckpointError("checkpoint '" + path +
                              "': trailing bytes after parameter data");
    }
    model.mark_stats_ready();
    return {std::move(model), meta};
}

std::pair<SiameseModel<float>, CheckpointMeta>
load_checkpoint(const std::string& path, const SiameseArch& expected) {
    auto loaded = load_checkpoint(path);
    const SiameseArch& a = loaded.second.arch;
    auto mismatch = [&](const char* field, std::size_t got,
                        std::size_t want) {
        throw CheckpointError("checkpoint '" + path + "': " + field + " is " +
                              std::to_string(got) + ", expected " +
                              std::to_string(want));
    };
    if (a.depth != expected.depth) mismatch("depth", a.depth, expected.depth);
    if (a.features != expected.features) {
        mismatch("features", a.features, expected.features);
    }
    if (a.kernel != expected.kernel) {
        mismatch("kernel", a.kernel, expected.kernel);
    }
    if (a.n != expected.n) mismatch("n", a.n, expected.n);
    if (a.residual != expected.residual) {
        throw CheckpointError("checkpoint '" + path +
                              "': residual flag mismatch");
    }
    return loaded;
}

} // namespace spectronet
