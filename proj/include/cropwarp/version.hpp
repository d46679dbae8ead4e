#pragma once

#define CROPWARP_VERSION "0.1.0"
