#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "densq/error.hpp"

namespace densq {

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw ConfigError(std::string(where), "expected a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (auto a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError(std::string(where) + "." + it.key(), "unknown key");
    }
}

template <class T>
T read_field(const json& obj, std::string_view where, const char* key, T fallback, bool required = false) {
    const std::string field = std::string(where) + "." + key;
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (required) throw ConfigError(field, "missing required key");
        return fallback;
    }
    try {
        if constexpr (std::is_same_v<T, std::size_t>) {
            if (!it->is_number_integer() || it->template get<long long>() < 0)
                throw ConfigError(field, "expected a non-negative integer");
            return static_cast<std::size_t>(it->template get<long long>());
        } else if constexpr (std::is_same_v<T, double>) {
            if (!it->is_number()) throw ConfigError(field, "expected a number");
            return it->template get<double>();
        } else {
            return it->template get<T>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(field, e.what());
    }
}

} // namespace detail

} // namespace densq
