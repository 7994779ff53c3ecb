#include "drk/snapshot.hpp"

#include "drk/errors.hpp"
#include "drk/text.hpp"

#include <cstring>
#include <fstream>
#include <map>

namespace drk::index {

namespace {

constexpr char kMagic[4] = {'D', 'R', 'K', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i)
            buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i)
            buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        u64(bits);
    }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.append(s);
    }
    std::string take() { return std::move(buf_); }

private:
    std::string buf_;
};

class Reader {
public:
    explicit Reader(std::string_view data) : data_(data) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(data_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    std::string_view view(std::uint64_t n) {
        need(n);
        const std::string_view s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > data_.size())
            throw Error(Errc::checksum_mismatch, "snapshot section shorter than declared");
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

std::string encode_params(const HybridIndex& idx) {
    Writer w;
    w.f64(idx.bm25().params().k1);
    w.f64(idx.bm25().params().b);
    w.u32(static_cast<std::uint32_t>(idx.hnsw().params().M));
    w.u32(static_cast<std::uint32_t>(idx.hnsw().params().ef_construction));
    w.u32(static_cast<std::uint32_t>(idx.hnsw().params().ef_search));
    w.u64(idx.hnsw().params().level_seed);
    w.u32(static_cast<std::uint32_t>(idx.dim()));
    return w.take();
}

std::string encode_chunks(const HybridIndex& idx) {
    Writer w;
    w.u32(static_cast<std::uint32_t>(idx.size()));
    for (const auto& c : idx.chunks()) {
        w.str(c.chunk_id);
        w.str(c.doc_id);
        w.u64(c.seq_no);
        w.u64(c.token_start);
        w.u64(c.token_end);
        w.u64(c.char_start);
        w.u64(c.char_end);
        w.str(c.text);
    }
    return w.take();
}

std::string encode_postings(const HybridIndex& idx) {
    Writer w;
    const auto& bm25 = idx.bm25();
    w.u32(static_cast<std::uint32_t>(bm25.doc_lengths().size()));
    for (const auto dl : bm25.doc_lengths())
        w.u32(dl);
    w.u32(static_cast<std::uint32_t>(bm25.postings().size()));
    for (const auto& [term, list] : bm25.postings()) {
        w.str(term);
        w.u32(static_cast<std::uint32_t>(list.size()));
        for (const auto& [slot, tf] : list) {
            w.u32(slot);
            w.u32(tf);
        }
    }
    return w.take();
}

std::string encode_vectors(const HybridIndex& idx) {
    Writer w;
    const auto& hnsw = idx.hnsw();
    w.u32(static_cast<std::uint32_t>(hnsw.size()));
    w.u32(static_cast<std::uint32_t>(hnsw.dim()));
    for (std::uint32_t s = 0; s < hnsw.size(); ++s)
        for (const double v : hnsw.vector_of(s))
            w.f64(v);
    return w.take();
}

std::string encode_graph(const HybridIndex& idx) {
    Writer w;
    const auto& hnsw = idx.hnsw();
    w.u32(hnsw.size() == 0 ? 0 : hnsw.entry_point());
    w.u32(static_cast<std::uint32_t>(hnsw.max_level() + 1));
    w.u32(static_cast<std::uint32_t>(hnsw.size()));
    for (std::uint32_t s = 0; s < hnsw.size(); ++s) {
        const auto& layers = hnsw.neighbors()[s];
        w.u32(static_cast<std::uint32_t>(layers.size()));
        for (const auto& layer : layers) {
            w.u32(static_cast<std::uint32_t>(layer.size()));
            for (const std::uint32_t n : layer)
                w.u32(n);
        }
    }
    return w.take();
}

} // namespace

std::string snapshot_serialize(const HybridIndex& index) {
    const std::pair<std::string_view, std::string> sections[] = {
        {"params", encode_params(index)},   {"chunks", encode_chunks(index)}, {"postings", encode_postings(index)},
        {"vectors", encode_vectors(index)}, {"graph", encode_graph(index)},
    };

    Writer w;
    std::string out(kMagic, sizeof(kMagic));
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(std::size(sections)));
    out += w.take();
    for (const auto& [name, payload] : sections) {
        Writer sw;
        sw.str(name);
        sw.u64(payload.size());
        out += sw.take();
        out += payload;
    }
    Writer cw;
    cw.u64(text::fnv1a64(out));
    out += cw.take();
    return out;
}

HybridIndex snapshot_parse(const std::string& bytes) {
    if (bytes.size() < sizeof(kMagic) + 8 + 8)
        throw Error(Errc::checksum_mismatch, "snapshot truncated");
    const std::string_view body(bytes.data(), bytes.size() - 8);
    Reader tail(std::string_view(bytes).substr(bytes.size() - 8));
    if (text::fnv1a64(body) != tail.u64())
        throw Error(Errc::checksum_mismatch, "snapshot checksum does not match");
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw Error(Errc::version_mismatch, "not a DRK1 snapshot");

    Reader r(body.substr(sizeof(kMagic)));
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw Error(Errc::version_mismatch, "unsupported snapshot version " + std::to_string(version));

    const std::uint32_t section_count = r.u32();
    std::map<std::string, std::string_view> sections;
    for (std::uint32_t i = 0; i < section_count; ++i) {
        std::string name = r.str();
        const std::uint64_t len = r.u64();
        sections.emplace(std::move(name), r.view(len));
    }
    for (const char* required : {"params", "chunks", "postings", "vectors", "graph"})
        if (!sections.count(required))
            throw Error(Errc::version_mismatch, std::string("snapshot is missing section '") + required + "'");

    Reader pr(sections.at("params"));
    Bm25Params bm25_params;
    bm25_params.k1 = pr.f64();
    bm25_params.b = pr.f64();
    HnswParams hnsw_params;
    hnsw_params.M = pr.u32();
    hnsw_params.ef_construction = pr.u32();
    hnsw_params.ef_search = pr.u32();
    hnsw_params.level_seed = pr.u64();
    const std::uint32_t dim = pr.u32();

    Reader cr(sections.at("chunks"));
    const std::uint32_t chunk_count = cr.u32();
    std::vector<ingest::Chunk> chunks;
    chunks.reserve(chunk_count);
    for (std::uint32_t i = 0; i < chunk_count; ++i) {
        ingest::Chunk c;
        c.chunk_id = cr.str();
        c.doc_id = cr.str();
        c.seq_no = cr.u64();
        c.token_start = cr.u64();
        c.token_end = cr.u64();
        c.char_start = cr.u64();
        c.char_end = cr.u64();
        c.text = cr.str();
        chunks.push_back(std::move(c));
    }

    Reader br(sections.at("postings"));
    const std::uint32_t doc_count = br.u32();
    std::vector<std::uint32_t> doc_lengths(doc_count);
    for (auto& dl : doc_lengths)
        dl = br.u32();
    const std::uint32_t term_count = br.u32();
    std::map<std::string, std::vector<Bm25Index::Posting>> postings;
    for (std::uint32_t t = 0; t < term_count; ++t) {
        std::string term = br.str();
        const std::uint32_t n = br.u32();
        std::vector<Bm25Index::Posting> list;
        list.reserve(n);
        for (std::uint32_t p = 0; p < n; ++p) {
            const std::uint32_t slot = br.u32();
            const std::uint32_t tf = br.u32();
            if (slot >= chunk_count)
                throw Error(Errc::checksum_mismatch, "posting references a slot outside the chunk store");
            list.emplace_back(slot, tf);
        }
        postings.emplace(std::move(term), std::move(list));
    }

    Reader vr(sections.at("vectors"));
    const std::uint32_t vec_count = vr.u32();
    const std::uint32_t vec_dim = vr.u32();
    if (vec_count != chunk_count || doc_count != chunk_count || vec_dim != dim)
        throw Error(Errc::checksum_mismatch, "snapshot sections disagree on corpus size");
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(vec_count) * vec_dim);
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(vec_count) * vec_dim; ++i)
        flat.push_back(vr.f64());

    Reader gr(sections.at("graph"));
    const std::uint32_t entry_point = gr.u32();
    const int max_level = static_cast<int>(gr.u32()) - 1;
    const std::uint32_t node_count = gr.u32();
    if (node_count != chunk_count)
        throw Error(Errc::checksum_mismatch, "graph node count disagrees with the chunk store");
    std::vector<int> levels(node_count);
    std::vector<std::vector<std::vector<std::uint32_t>>> neighbors(node_count);
    for (std::uint32_t s = 0; s < node_count; ++s) {
        const std::uint32_t layer_count = gr.u32();
        levels[s] = static_cast<int>(layer_count) - 1;
        neighbors[s].resize(layer_count);
        for (std::uint32_t l = 0; l < layer_count; ++l) {
            const std::uint32_t n = gr.u32();
            neighbors[s][l].reserve(n);
            for (std::uint32_t j = 0; j < n; ++j) {
                const std::uint32_t id = gr.u32();
                if (id >= node_count)
                    throw Error(Errc::checksum_mismatch, "graph edge references an unknown node");
                neighbors[s][l].push_back(id);
            }
        }
    }

    auto bm25 = Bm25Index::from_parts(bm25_params, std::move(postings), std::move(doc_lengths));
    auto hnsw = HnswIndex::from_parts(hnsw_params, dim, std::move(flat), std::move(levels), std::move(neighbors),
                                      entry_point, max_level);
    return HybridIndex::from_parts(std::move(bm25), std::move(hnsw), std::move(chunks));
}

void snapshot_save(const HybridIndex& index, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
    const std::string bytes = snapshot_serialize(index);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error(Errc::io_error, "failed writing snapshot to " + path.string());
}

HybridIndex snapshot_load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::io_error, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return snapshot_parse(bytes);
}

} // namespace drk::index
