// SPDX-License-Identifier: Apache-2.0

#include <openssl/evp.h>

#include <httplib.h>

#include <cmath>
#include <json.hpp>

#include "panoweave/backend.hpp"
#include "panoweave/png_io.hpp"

namespace panoweave {
namespace {

using nlohmann::json;

const json& require_field(const json& body, const char* name, json::value_t type) {
    auto it = body.find(name);
    if (it == body.end()) throw ProtocolError(std::string("missing field '") + name + "'");
    const bool numeric_ok = (type == json::value_t::number_float && it->is_number()) ||
                            (type == json::value_t::number_integer && it->is_number_integer());
    if (it->type() != type && !numeric_ok) throw ProtocolError(std::string("field '") + name + "' has the wrong type");
    return *it;
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw ProtocolError("base64 length is not a multiple of 4");
    std::vector<std::uint8_t> out(3 * text.size() / 4);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) throw ProtocolError("invalid base64 payload");
    std::size_t padding = 0;
    if (!text.empty() && text.back() == '=') ++padding;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;
    out.resize(static_cast<std::size_t>(n) - padding);
    return out;
}

std::string encode_request(const InpaintRequest& request) {
    json body = {
        {"image_png_b64", base64_encode(encode_png(request.image))},
        {"mask_png_b64", base64_encode(encode_png(request.mask))},
        {"prompt", request.prompt},
        {"t0", request.sdedit.t0},
        {"guidance_scale", request.sdedit.guidance_scale},
        {"variance_scale", request.sdedit.variance_scale},
        {"steps", request.sdedit.steps},
        {"seed", request.sdedit.seed},
    };
    if (request.negative_prompt) body["negative_prompt"] = *request.negative_prompt;
    return body.dump();
}

InpaintRequest decode_request(std::string_view text) {
    const json body = json::parse(text, nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw ProtocolError("request body is not a JSON object");

    InpaintRequest req;
    try {
        req.image = decode_png_image(base64_decode(require_field(body, "image_png_b64", json::value_t::string).get<std::string>()));
    } catch (const IoError& e) {
        throw ProtocolError(std::string("field 'image_png_b64': ") + e.what());
    }
    try {
        req.mask = decode_png_mask(base64_decode(require_field(body, "mask_png_b64", json::value_t::string).get<std::string>()));
    } catch (const IoError& e) {
        throw ProtocolError(std::string("field 'mask_png_b64': ") + e.what());
    }
    for (float& v : req.mask.values()) v = v >= 0.5f ? 1.0f : 0.0f;
    if (req.mask.size() != req.image.size())
        throw ProtocolError("field 'mask_png_b64': size " + to_string(req.mask.size()) + " differs from image " +
                            to_string(req.image.size()));
    req.prompt = require_field(body, "prompt", json::value_t::string).get<std::string>();
    if (auto it = body.find("negative_prompt"); it != body.end()) {
        if (!it->is_string()) throw ProtocolError("field 'negative_prompt' has the wrong type");
        req.negative_prompt = it->get<std::string>();
    }
    req.sdedit.t0 = require_field(body, "t0", json::value_t::number_float).get<double>();
    req.sdedit.guidance_scale = require_field(body, "guidance_scale", json::value_t::number_float).get<double>();
    req.sdedit.variance_scale = require_field(body, "variance_scale", json::value_t::number_float).get<double>();
    req.sdedit.steps = require_field(body, "steps", json::value_t::number_integer).get<int>();
    req.sdedit.seed = require_field(body, "seed", json::value_t::number_integer).get<std::uint64_t>();
    try {
        validate(req.sdedit);
    } catch (const ParameterError& e) {
        throw ProtocolError(e.what());
    }
    return req;
}

std::string encode_response(const ViewImage& image) {
    return json{{"image_png_b64", base64_encode(encode_png(image))}}.dump();
}

ViewImage decode_response(std::string_view text, Size expected) {
    const json body = json::parse(text, nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw ProtocolError("response body is not a JSON object");
    ViewImage image;
    try {
        image = decode_png_image(base64_decode(require_field(body, "image_png_b64", json::value_t::string).get<std::string>()));
    } catch (const IoError& e) {
        throw ProtocolError(std::string("response image: ") + e.what());
    }
    if (image.size() != expected)
        throw ProtocolError("response image is " + to_string(image.size()) + ", expected " + to_string(expected));
    return image;
}

// ---------------------------------------------------------------------------

RemoteInpainter::RemoteInpainter(std::string endpoint, double timeout_seconds) : endpoint_(std::move(endpoint)) {
    const std::string scheme = "http://";
    if (endpoint_.rfind(scheme, 0) != 0) throw ConfigError("endpoint must start with http://, got '" + endpoint_ + "'");
    const auto slash = endpoint_.find('/', scheme.size());
    const std::string host_port = endpoint_.substr(0, slash);
    if (slash != std::string::npos) base_path_ = endpoint_.substr(slash);
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
    if (!(timeout_seconds > 0.0)) throw ConfigError("timeout must be > 0");

    client_ = std::make_unique<httplib::Client>(host_port);
    const auto whole = static_cast<time_t>(std::floor(timeout_seconds));
    const auto micros = static_cast<time_t>((timeout_seconds - whole) * 1e6);
    client_->set_connection_timeout(whole, micros);
    client_->set_read_timeout(whole, micros);
    client_->set_write_timeout(whole, micros);
}

RemoteInpainter::~RemoteInpainter() = default;

ViewImage RemoteInpainter::inpaint(const InpaintRequest& request) {
    require_same_size(request.image, request.mask, "remote_inpaint");
    const std::string body = encode_request(request);
    std::lock_guard lock(mutex_);
    auto res = client_->Post(base_path_ + "/inpaint", body, "application/json");
    if (!res) throw TransportError("POST " + endpoint_ + "/inpaint failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) throw ServiceError(res->status, res->body);
    const ViewImage generated = decode_response(res->body, request.image.size());
    return paste_guidance(request.image, request.mask, generated);
}

bool RemoteInpainter::healthy() {
    std::lock_guard lock(mutex_);
    auto res = client_->Get(base_path_ + "/healthz");
    return res && res->status == 200 && res->body.rfind("ok", 0) == 0;
}

}  // namespace panoweave
