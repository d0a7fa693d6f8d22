#pragma once

#define ENSQ_VERSION "0.1.0"
