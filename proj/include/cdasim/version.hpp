#pragma once

#ifndef CDASIM_VERSION
#define CDASIM_VERSION "0.0.0"
#endif

namespace cdasim {
inline constexpr const char* kVersion = CDASIM_VERSION;
}
