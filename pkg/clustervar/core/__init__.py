# Core application modules
