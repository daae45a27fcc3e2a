// src/m00/secret_0.c
int m00_reset9733(void) { return 242; }
int m00_tune3068(void) { return 2; }
int m00_flush7813(void) { return 79; }
int m00_init9301(void) { return 248; }
int m00_tune2083(void) { return 24; }
int m00_probe8870(void) { return 51; }
int m00_poll74(void) { return 52; }
int m00_load6937(void) { return 70; }
int m00_probe4656(void) { return 255; }
