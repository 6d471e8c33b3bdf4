#ifndef MFLAB_VERSION_HPP
#define MFLAB_VERSION_HPP

#define MFLAB_VERSION "0.1.0"

#endif
