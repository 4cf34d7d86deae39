// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "panoweave/guidance.hpp"

namespace httplib {
class Client;
}

namespace panoweave {

/// Inpainting backend. Implementations return an image of the request's size
/// whose pixels under mask = 0 match request.image (within
/// preservation_tolerance() mean absolute difference).
class Inpainter {
public:
    virtual ~Inpainter() = default;

    virtual ViewImage inpaint(const InpaintRequest& request) = 0;

    /// 0 means known pixels must be bit-identical.
    virtual double preservation_tolerance() const { return 0.0; }
    virtual std::string name() const = 0;
};

/// Deterministic stand-in for a diffusion model: propagates known colors into
/// the hole, then adds seeded Gaussian noise of std sigma * t0 to the filled pixels.
ViewImage mock_inpaint(const InpaintRequest& request, double sigma = 0.02);

class MockInpainter final : public Inpainter {
public:
    explicit MockInpainter(double sigma = 0.02) : sigma_(sigma) {}

    ViewImage inpaint(const InpaintRequest& request) override { return mock_inpaint(request, sigma_); }
    std::string name() const override { return "mock"; }

private:
    double sigma_;
};

// ---------------------------------------------------------------------------
// Wire protocol

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ProtocolError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// JSON body of POST {endpoint}/inpaint.
std::string encode_request(const InpaintRequest& request);
/// Server-side parse; throws ProtocolError naming the offending field.
InpaintRequest decode_request(std::string_view body);

std::string encode_response(const ViewImage& image);
/// Throws ProtocolError for malformed bodies or a size other than `expected`.
ViewImage decode_response(std::string_view body, Size expected);

/// HTTP client for the diffusion service. Known pixels are restored from the
/// request image after every call, so the preservation clause holds regardless
/// of what the service returns.
class RemoteInpainter final : public Inpainter {
public:
    RemoteInpainter(std::string endpoint, double timeout_seconds);
    ~RemoteInpainter() override;

    ViewImage inpaint(const InpaintRequest& request) override;
    double preservation_tolerance() const override { return 0.1; }
    std::string name() const override { return "remote " + endpoint_; }

    /// GET {endpoint}/healthz == 200 "ok".
    bool healthy();

private:
    std::string endpoint_;
    std::string base_path_;
    std::unique_ptr<httplib::Client> client_;
    std::mutex mutex_;
};

// ---------------------------------------------------------------------------

/// Decorator recording call counts, concurrency and wall time.
class InstrumentedInpainter final : public Inpainter {
public:
    explicit InstrumentedInpainter(Inpainter& inner) : inner_(inner) {}

    ViewImage inpaint(const InpaintRequest& request) override;
    double preservation_tolerance() const override { return inner_.preservation_tolerance(); }
    std::string name() const override { return inner_.name(); }

    std::size_t calls() const { return calls_.load(); }
    int max_in_flight() const { return max_in_flight_.load(); }
    double total_ms() const { return total_ms_.load(); }

private:
    Inpainter& inner_;
    std::atomic<std::size_t> calls_{0};
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_in_flight_{0};
    std::atomic<double> total_ms_{0.0};
};

}  // namespace panoweave
