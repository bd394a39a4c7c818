#pragma once

#ifndef SIRVAR_VERSION
#define SIRVAR_VERSION "0.1.0"
#endif

namespace sirvar {
inline constexpr const char* kVersion = SIRVAR_VERSION;
}
