#pragma once

#include <optional>
#include <string_view>

namespace gcdl {

enum class Method { kOneBitGC, kSGC, kIgnoreStragglers1Bit };

const char* method_name(Method method);
std::optional<Method> method_from_name(std::string_view name);

}  // namespace gcdl
