#include "telelink/netlink/wire.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace telelink {

namespace {

constexpr std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        table[i] = c;
    }
    return table;
}

constexpr auto kCrcTable = make_crc_table();

enum MsgType : std::uint8_t {
    kEefPoseCmd = 1,
    kHandJointCmd = 2,
    kHeadPoseCmd = 3,
    kBaseVelocityCmd = 4,
    kWrenchFeedback = 5,
    kHandCurrentFeedback = 6,
    kArmStateFeedback = 7,
    kVideoFrame = 8,
    kFaceKeypoints = 9,
    kErrorState = 10,
};

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void put_vec3(std::vector<std::uint8_t>& out, const Vec3& v) {
    put_f64(out, v.x());
    put_f64(out, v.y());
    put_f64(out, v.z());
}

void put_quat(std::vector<std::uint8_t>& out, const Quat& q) {
    put_f64(out, q.w());
    put_f64(out, q.x());
    put_f64(out, q.y());
    put_f64(out, q.z());
}

void put_pose(std::vector<std::uint8_t>& out, const Pose6D& p) {
    put_vec3(out, p.translation);
    put_quat(out, p.rotation);
}

void put_twist(std::vector<std::uint8_t>& out, const Twist& t) {
    put_vec3(out, t.linear);
    put_vec3(out, t.angular);
}

void put_wrench(std::vector<std::uint8_t>& out, const Wrench& w) {
    put_vec3(out, w.force);
    put_vec3(out, w.torque);
}

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

void check_pose(const Pose6D& p, const char* what) {
    require(is_valid(p, 1e-6), what);
}

struct PayloadWriter {
    std::vector<std::uint8_t>& out;

    std::uint8_t operator()(const EefPoseCmd& m) {
        check_pose(m.pose, "encode: EefPoseCmd pose invalid");
        require(is_finite(m.twist), "encode: EefPoseCmd twist non-finite");
        put_u8(out, static_cast<std::uint8_t>(m.side));
        put_pose(out, m.pose);
        put_twist(out, m.twist);
        return kEefPoseCmd;
    }
    std::uint8_t operator()(const HandJointCmd& m) {
        require(m.joints.size() == 5 || m.joints.size() == 9,
                "encode: HandJointCmd needs 5 or 9 joints");
        require(m.joints.allFinite(), "encode: HandJointCmd joints non-finite");
        put_u8(out, static_cast<std::uint8_t>(m.side));
        put_u8(out, static_cast<std::uint8_t>(m.joints.size()));
        for (int i = 0; i < m.joints.size(); ++i) put_f64(out, m.joints[i]);
        return kHandJointCmd;
    }
    std::uint8_t operator()(const HeadPoseCmd& m) {
        check_pose(m.pose, "encode: HeadPoseCmd pose invalid");
        put_pose(out, m.pose);
        return kHeadPoseCmd;
    }
    std::uint8_t operator()(const BaseVelocityCmd& m) {
        require(is_finite(m.twist), "encode: BaseVelocityCmd twist non-finite");
        put_twist(out, m.twist);
        return kBaseVelocityCmd;
    }
    std::uint8_t operator()(const WrenchFeedback& m) {
        require(is_finite(m.wrench), "encode: WrenchFeedback wrench non-finite");
        put_u8(out, static_cast<std::uint8_t>(m.side));
        put_wrench(out, m.wrench);
        return kWrenchFeedback;
    }
    std::uint8_t operator()(const HandCurrentFeedback& m) {
        put_u8(out, static_cast<std::uint8_t>(m.side));
        for (double c : m.currents) {
            require(std::isfinite(c) && c >= 0.0, "encode: currents must be finite and >= 0");
            put_f64(out, c);
        }
        return kHandCurrentFeedback;
    }
    std::uint8_t operator()(const ArmStateFeedback& m) {
        require(m.q.size() > 0 && m.q.size() <= 16, "encode: ArmStateFeedback needs 1..16 joints");
        require(m.q.size() == m.qd.size(), "encode: ArmStateFeedback q/qd size mismatch");
        require(m.q.allFinite() && m.qd.allFinite(), "encode: ArmStateFeedback non-finite");
        put_u8(out, static_cast<std::uint8_t>(m.side));
        put_u8(out, static_cast<std::uint8_t>(m.q.size()));
        for (int i = 0; i < m.q.size(); ++i) put_f64(out, m.q[i]);
        for (int i = 0; i < m.qd.size(); ++i) put_f64(out, m.qd[i]);
        return kArmStateFeedback;
    }
    std::uint8_t operator()(const VideoFrame& m) {
        put_u8(out, m.stream_id);
        put_u64(out, m.capture_timestamp_ns);
        put_u32(out, static_cast<std::uint32_t>(m.payload.size()));
        out.insert(out.end(), m.payload.begin(), m.payload.end());
        return kVideoFrame;
    }
    std::uint8_t operator()(const FaceKeypoints& m) {
        out.insert(out.end(), m.payload.begin(), m.payload.end());
        return kFaceKeypoints;
    }
    std::uint8_t operator()(const ErrorState& m) {
        put_u8(out, static_cast<std::uint8_t>(m.side));
        put_u32(out, m.code);
        return kErrorState;
    }
};

/// Bounds-checked little-endian reader over the payload region. Every read
/// rewinds to its entry position on failure, so abs() then names the first
/// byte of the field that failed to parse.
struct Reader {
    std::span<const std::uint8_t> buf;
    std::size_t pos = 0;
    std::size_t base = 0;  // absolute offset of buf[0] for diagnostics

    std::size_t abs() const { return base + pos; }
    bool done() const { return pos == buf.size(); }

    bool fail(std::size_t rewind_to) {
        pos = rewind_to;
        return false;
    }
    bool u8(std::uint8_t& v) {
        if (pos + 1 > buf.size()) return false;
        v = buf[pos++];
        return true;
    }
    bool u32(std::uint32_t& v) {
        if (pos + 4 > buf.size()) return false;
        v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos + i]) << (8 * i);
        pos += 4;
        return true;
    }
    bool u64(std::uint64_t& v) {
        if (pos + 8 > buf.size()) return false;
        v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
        pos += 8;
        return true;
    }
    bool f64(double& v) {
        std::uint64_t bits;
        if (!u64(bits)) return false;
        v = std::bit_cast<double>(bits);
        return true;
    }
    bool finite_f64(double& v) {
        const std::size_t p0 = pos;
        if (!f64(v)) return false;
        return std::isfinite(v) || fail(p0);
    }
    bool vec3(Vec3& v) {
        // inner reads rewind themselves; pos ends at the failing component
        return finite_f64(v.x()) && finite_f64(v.y()) && finite_f64(v.z());
    }
    bool quat(Quat& q) {
        const std::size_t p0 = pos;
        if (!(finite_f64(q.w()) && finite_f64(q.x()) && finite_f64(q.y()) && finite_f64(q.z())))
            return false;
        // accepted as-is, not renormalized: round trips stay bit-exact
        return std::abs(q.norm() - 1.0) <= 1e-6 || fail(p0);
    }
    bool pose(Pose6D& p) { return vec3(p.translation) && quat(p.rotation); }
    bool twist(Twist& t) { return vec3(t.linear) && vec3(t.angular); }
    bool wrench(Wrench& w) { return vec3(w.force) && vec3(w.torque); }
    bool side(Side& s) {
        const std::size_t p0 = pos;
        std::uint8_t b;
        if (!u8(b)) return false;
        if (b > 1) return fail(p0);
        s = static_cast<Side>(b);
        return true;
    }
};

bool parse_payload(std::uint8_t type, Reader& r, Message& out) {
    switch (type) {
        case kEefPoseCmd: {
            EefPoseCmd m;
            if (!(r.side(m.side) && r.pose(m.pose) && r.twist(m.twist))) return false;
            out = m;
            return true;
        }
        case kHandJointCmd: {
            HandJointCmd m;
            std::uint8_t n;
            if (!r.side(m.side) || !r.u8(n) || (n != 5 && n != 9)) return false;
            m.joints.resize(n);
            for (int i = 0; i < n; ++i)
                if (!r.finite_f64(m.joints[i])) return false;
            out = std::move(m);
            return true;
        }
        case kHeadPoseCmd: {
            HeadPoseCmd m;
            if (!r.pose(m.pose)) return false;
            out = m;
            return true;
        }
        case kBaseVelocityCmd: {
            BaseVelocityCmd m;
            if (!r.twist(m.twist)) return false;
            out = m;
            return true;
        }
        case kWrenchFeedback: {
            WrenchFeedback m;
            if (!(r.side(m.side) && r.wrench(m.wrench))) return false;
            out = m;
            return true;
        }
        case kHandCurrentFeedback: {
            HandCurrentFeedback m;
            if (!r.side(m.side)) return false;
            for (double& c : m.currents)
                if (!r.finite_f64(c) || c < 0.0) return false;
            out = m;
            return true;
        }
        case kArmStateFeedback: {
            ArmStateFeedback m;
            std::uint8_t n;
            if (!r.side(m.side) || !r.u8(n) || n == 0 || n > 16) return false;
            m.q.resize(n);
            m.qd.resize(n);
            for (int i = 0; i < n; ++i)
                if (!r.finite_f64(m.q[i])) return false;
            for (int i = 0; i < n; ++i)
                if (!r.finite_f64(m.qd[i])) return false;
            out = std::move(m);
            return true;
        }
        case kVideoFrame: {
            VideoFrame m;
            std::uint32_t declared;
            if (!r.u8(m.stream_id) || !r.u64(m.capture_timestamp_ns) || !r.u32(declared))
                return false;
            if (declared != r.buf.size() - r.pos) return false;  // declared length must match
            m.payload.assign(r.buf.begin() + r.pos, r.buf.end());
            r.pos = r.buf.size();
            out = std::move(m);
            return true;
        }
        case kFaceKeypoints: {
            FaceKeypoints m;
            m.payload.assign(r.buf.begin() + r.pos, r.buf.end());
            r.pos = r.buf.size();
            out = std::move(m);
            return true;
        }
        case kErrorState: {
            ErrorState m;
            if (!(r.side(m.side) && r.u32(m.code))) return false;
            out = m;
            return true;
        }
        default:
            return false;
    }
}

}  // namespace

std::uint32_t crc32_ieee(std::span<const std::uint8_t> data) {
    std::uint32_t c = 0xFFFFFFFFu;
    for (std::uint8_t b : data) c = kCrcTable[(c ^ b) & 0xFFu] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

std::uint8_t msg_type_of(const Message& msg) {
    struct Visitor {
        std::uint8_t operator()(const EefPoseCmd&) { return kEefPoseCmd; }
        std::uint8_t operator()(const HandJointCmd&) { return kHandJointCmd; }
        std::uint8_t operator()(const HeadPoseCmd&) { return kHeadPoseCmd; }
        std::uint8_t operator()(const BaseVelocityCmd&) { return kBaseVelocityCmd; }
        std::uint8_t operator()(const WrenchFeedback&) { return kWrenchFeedback; }
        std::uint8_t operator()(const HandCurrentFeedback&) { return kHandCurrentFeedback; }
        std::uint8_t operator()(const ArmStateFeedback&) { return kArmStateFeedback; }
        std::uint8_t operator()(const VideoFrame&) { return kVideoFrame; }
        std::uint8_t operator()(const FaceKeypoints&) { return kFaceKeypoints; }
        std::uint8_t operator()(const ErrorState&) { return kErrorState; }
    };
    return std::visit(Visitor{}, msg);
}

std::vector<std::uint8_t> encode(const Message& msg, std::uint32_t seq,
                                 std::uint64_t timestamp_ns) {
    std::vector<std::uint8_t> payload;
    const std::uint8_t type = std::visit(PayloadWriter{payload}, msg);
    if (payload.size() > 0xFFFFFFFFull) throw std::invalid_argument("encode: payload too large");

    std::vector<std::uint8_t> frame;
    frame.reserve(kFrameOverhead + payload.size());
    put_u8(frame, kMagic0);
    put_u8(frame, kMagic1);
    put_u8(frame, type);
    put_u32(frame, seq);
    put_u64(frame, timestamp_ns);
    put_u32(frame, static_cast<std::uint32_t>(payload.size()));
    frame.insert(frame.end(), payload.begin(), payload.end());
    put_u32(frame, crc32_ieee({frame.data(), frame.size()}));
    return frame;
}

const char* to_string(DecodeStatus s) {
    switch (s) {
        case DecodeStatus::ok: return "ok";
        case DecodeStatus::bad_magic: return "bad-magic";
        case DecodeStatus::truncated: return "truncated";
        case DecodeStatus::length_mismatch: return "length-mismatch";
        case DecodeStatus::crc_mismatch: return "crc-mismatch";
        case DecodeStatus::unknown_type: return "unknown-type";
        case DecodeStatus::malformed_payload: return "malformed-payload";
    }
    return "?";
}

DecodeResult decode(std::span<const std::uint8_t> bytes) {
    DecodeResult res;
    if (bytes.size() < 2) {
        res.status = bytes.empty() || bytes[0] == kMagic0 ? DecodeStatus::truncated
                                                          : DecodeStatus::bad_magic;
        res.error_offset = bytes.empty() || bytes[0] == kMagic0 ? bytes.size() : 0;
        return res;
    }
    if (bytes[0] != kMagic0 || bytes[1] != kMagic1) {
        res.status = DecodeStatus::bad_magic;
        res.error_offset = bytes[0] != kMagic0 ? 0 : 1;
        return res;
    }
    if (bytes.size() < kFrameOverhead) {
        res.status = DecodeStatus::truncated;
        res.error_offset = bytes.size();
        return res;
    }

    Reader header{bytes, 2, 0};
    std::uint8_t type;
    std::uint32_t seq, payload_len;
    std::uint64_t ts;
    header.u8(type);
    header.u32(seq);
    header.u64(ts);
    header.u32(payload_len);

    const std::size_t framed = kFrameOverhead + static_cast<std::size_t>(payload_len);
    if (bytes.size() < framed) {
        res.status = DecodeStatus::truncated;
        res.error_offset = bytes.size();
        return res;
    }
    if (bytes.size() > framed) {
        res.status = DecodeStatus::length_mismatch;
        res.error_offset = framed;
        return res;
    }

    const std::size_t crc_off = kHeaderSize + payload_len;
    const std::uint32_t want = crc32_ieee(bytes.first(crc_off));
    Reader trailer{bytes, crc_off, 0};
    std::uint32_t got;
    trailer.u32(got);
    if (want != got) {
        res.status = DecodeStatus::crc_mismatch;
        res.error_offset = crc_off;
        return res;
    }

    if (type < kEefPoseCmd || type > kErrorState) {
        res.status = DecodeStatus::unknown_type;
        res.error_offset = 2;
        return res;
    }

    Reader body{bytes.subspan(kHeaderSize, payload_len), 0, kHeaderSize};
    Message msg;
    if (!parse_payload(type, body, msg) || !body.done()) {
        res.status = DecodeStatus::malformed_payload;
        res.error_offset = body.abs();
        return res;
    }
    res.frame = DecodedFrame{std::move(msg), seq, ts};
    return res;
}

}  // namespace telelink
