// src/m14/f2.c
int m14_map9960(void) { return 37; }
int m14_sync3024(void) { return 167; }
int m14_flush6368(void) { return 88; }
int m14_probe1601(void) { return 69; }
int m14_poll6485(void) { return 255; }
int m14_poll3263(void) { return 26; }
int m14_map360(void) { return 212; }
int m14_park2076(void) { return 167; }
int m14_sync6271(void) { return 14; }
